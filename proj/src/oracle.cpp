#include "branchrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace branchrl {

bool SuperAction::contains(BaseActionId a) const {
    return std::binary_search(members.begin(), members.end(), a);
}

bool SuperAction::well_formed(std::size_t n_actions) const {
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i] >= n_actions) return false;
        if (i > 0 && members[i] <= members[i - 1]) return false;
    }
    return true;
}

std::string SuperAction::to_string() const {
    std::ostringstream out;
    out << '{';
    for (std::size_t i = 0; i < members.size(); ++i) out << (i ? "," : "") << members[i];
    out << '}';
    return out.str();
}

namespace {

// Score of a set under the extended ordering: (#infinite members, finite sum).
struct Score {
    std::size_t infinite = 0;
    double finite = 0.0;

    void add(double w) {
        if (std::isinf(w) && w > 0)
            ++infinite;
        else
            finite += w;
    }
    double total() const { return infinite ? std::numeric_limits<double>::infinity() : finite; }
    bool beats(const Score& o) const {
        if (infinite != o.infinite) return infinite > o.infinite;
        return finite > o.finite;
    }
};

Score score_of(const SuperAction& a, std::span<const double> w) {
    Score s;
    for (auto b : a.members) s.add(w[b]);
    return s;
}

}  // namespace

ActionClass ActionClass::top_m(std::size_t n_actions, std::size_t m) {
    ActionClass c;
    c.kind_ = Kind::TopM;
    c.n_actions_ = n_actions;
    c.m_ = m;
    return c;
}

ActionClass ActionClass::partition(std::size_t n_actions, std::vector<SuperAction> blocks) {
    ActionClass c;
    c.kind_ = Kind::Partition;
    c.n_actions_ = n_actions;
    c.m_ = blocks.empty() ? 0 : blocks.front().size();
    std::sort(blocks.begin(), blocks.end());
    c.listed_ = std::move(blocks);
    return c;
}

ActionClass ActionClass::explicit_list(std::size_t n_actions, std::vector<SuperAction> actions) {
    ActionClass c;
    c.kind_ = Kind::Explicit;
    c.n_actions_ = n_actions;
    c.m_ = actions.empty() ? 0 : actions.front().size();
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    c.listed_ = std::move(actions);
    return c;
}

std::uint64_t ActionClass::size() const {
    if (kind_ != Kind::TopM) return listed_.size();
    if (m_ > n_actions_) return 0;
    // C(N, m) with saturation; the running product stays an exact binomial.
    const std::size_t k = std::min(m_, n_actions_ - m_);
    unsigned __int128 acc = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        acc = acc * (n_actions_ - k + i) / i;
        if (acc > UINT64_MAX) return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(acc);
}

bool ActionClass::contains(const SuperAction& action) const {
    if (kind_ == Kind::TopM) return action.size() == m_ && action.well_formed(n_actions_);
    return std::binary_search(listed_.begin(), listed_.end(), action);
}

std::vector<std::string> ActionClass::problems() const {
    std::vector<std::string> out;
    if (kind_ == Kind::TopM) {
        if (m_ == 0) out.push_back("top_m: m must be positive");
        if (m_ > n_actions_) out.push_back("top_m: m exceeds N");
        return out;
    }
    const char* label = kind_ == Kind::Partition ? "partition" : "explicit";
    if (listed_.empty()) out.push_back(std::string(label) + ": empty decision class");
    std::set<BaseActionId> seen;
    for (const auto& a : listed_) {
        if (!a.well_formed(n_actions_)) out.push_back(std::string(label) + ": malformed super action " + a.to_string());
        if (a.size() != m_) out.push_back(std::string(label) + ": super action " + a.to_string() + " has wrong size");
        if (kind_ == Kind::Partition) {
            for (auto b : a.members)
                if (!seen.insert(b).second)
                    out.push_back("partition: base action " + std::to_string(b) + " appears in two blocks");
        }
    }
    return out;
}

double ActionClass::argmax_into(std::span<const double> weights, SuperAction& out) const {
    if (kind_ == Kind::TopM) {
        if (m_ > n_actions_ || m_ == 0) throw EmptyClassError();
        // Selection of the m largest weights with +inf first and lower index
        // winning ties, which gives the lexicographically smallest maximizer.
        // Insertion into a best-first window keeps this O(N m).
        out.members.clear();
        for (std::size_t a = 0; a < n_actions_; ++a) {
            std::size_t pos = out.members.size();
            while (pos > 0 && weights[a] > weights[out.members[pos - 1]]) --pos;
            if (pos >= m_) continue;
            if (out.members.size() < m_) out.members.push_back(a);
            for (std::size_t j = out.members.size() - 1; j > pos; --j) out.members[j] = out.members[j - 1];
            out.members[pos] = a;
        }
        std::sort(out.members.begin(), out.members.end());
        return score_of(out, weights).total();
    }
    if (listed_.empty()) throw EmptyClassError();
    // listed_ is sorted, so the first strict improvement keeps the smallest tie.
    std::size_t best = 0;
    Score best_score = score_of(listed_[0], weights);
    for (std::size_t i = 1; i < listed_.size(); ++i) {
        Score s = score_of(listed_[i], weights);
        if (s.beats(best_score)) {
            best = i;
            best_score = s;
        }
    }
    out = listed_[best];
    return best_score.total();
}

OracleChoice ActionClass::argmax(std::span<const double> weights) const {
    OracleChoice choice;
    choice.total = argmax_into(weights, choice.action);
    return choice;
}

void ActionClass::for_each(const std::function<bool(const SuperAction&)>& visit) const {
    if (kind_ != Kind::TopM) {
        for (const auto& a : listed_)
            if (!visit(a)) return;
        return;
    }
    if (m_ == 0 || m_ > n_actions_) return;
    SuperAction cur;
    cur.members.resize(m_);
    std::iota(cur.members.begin(), cur.members.end(), std::size_t{0});
    while (true) {
        if (!visit(cur)) return;
        // Advance to the next combination in lexicographic order.
        std::size_t i = m_;
        while (i > 0 && cur.members[i - 1] == n_actions_ - m_ + (i - 1)) --i;
        if (i == 0) return;
        ++cur.members[i - 1];
        for (std::size_t j = i; j < m_; ++j) cur.members[j] = cur.members[j - 1] + 1;
    }
}

std::vector<SuperAction> ActionClass::enumerate() const {
    std::vector<SuperAction> out;
    for_each([&](const SuperAction& a) {
        out.push_back(a);
        return true;
    });
    return out;
}

SuperAction ActionClass::uniform(Rng& rng) const {
    if (kind_ != Kind::TopM) {
        if (listed_.empty()) throw EmptyClassError();
        return listed_[rng.below(listed_.size())];
    }
    if (m_ == 0 || m_ > n_actions_) throw EmptyClassError();
    // Partial Fisher-Yates: the first m slots form a uniform m-subset.
    std::vector<BaseActionId> pool(n_actions_);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t j = i + rng.below(n_actions_ - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m_);
    std::sort(pool.begin(), pool.end());
    return SuperAction(std::move(pool));
}

std::vector<double> ActionClass::inclusion_probabilities() const {
    std::vector<double> p(n_actions_, 0.0);
    if (kind_ == Kind::TopM) {
        if (m_ == 0 || m_ > n_actions_) throw EmptyClassError();
        std::fill(p.begin(), p.end(), static_cast<double>(m_) / static_cast<double>(n_actions_));
        return p;
    }
    if (listed_.empty()) throw EmptyClassError();
    const double w = 1.0 / static_cast<double>(listed_.size());
    for (const auto& a : listed_)
        for (auto b : a.members) p[b] += w;
    return p;
}

}  // namespace branchrl
