#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "branchrl/baselines.hpp"
#include "branchrl/branchrfe.hpp"
#include "branchrl/branchvi.hpp"
#include "branchrl/diagnostics.hpp"
#include "branchrl/instances.hpp"
#include "branchrl/model_io.hpp"
#include "branchrl/planner.hpp"

namespace fs = std::filesystem;
using namespace branchrl;

namespace {

enum Exit : int { kOk = 0, kFailed = 1, kInputError = 2, kCapHit = 3 };

std::string fmt17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::size_t worker_cap(std::size_t jobs) {
    std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BRANCHRL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) cap = static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::min(cap, jobs));
}

// Runs job(i) for i in [0, jobs) on a small pool. Results must be written to
// per-job slots; the first exception is rethrown after all workers stop.
template <class Job>
void parallel_for(std::size_t jobs, Job job) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_lock;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) {
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_lock);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n = worker_cap(jobs);
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& model_path) {
    const BranchingMdp mdp = load_model(model_path);
    const auto problems = validate(mdp);
    for (const auto& v : problems)
        std::cout << v.field << " " << v.location << " " << fmt17(v.magnitude) << " " << v.message << "\n";
    std::cout << (problems.empty() ? "valid" : std::to_string(problems.size()) + " violation(s)") << "\n";
    return problems.empty() ? kOk : kFailed;
}

// -------------------------------------------------------------------- plan

int cmd_plan(const std::string& model_path, const std::string& policy_path, const std::string& out) {
    const BranchingMdp mdp = load_model(model_path);
    const auto solution = optimal_values(mdp);
    const double best = solution.values.at(1, mdp.initial);
    std::cout << "optimal_value " << fmt17(best) << "\n";
    if (!out.empty()) save_policy(out, solution.policy);
    if (!policy_path.empty()) {
        const PolicyTable policy = load_policy(policy_path);
        check_policy(mdp, policy);
        const double v = policy_value(mdp, policy).at(1, mdp.initial);
        std::cout << "policy_value " << fmt17(v) << "\ngap " << fmt17(best - v) << "\n";
    }
    return kOk;
}

// ------------------------------------------------------------------ run-rm

struct RmOptions {
    std::string model, algo = "branchvi", out, summary;
    std::size_t K = 5000, runs = 1;
    double delta = 0.005, explore = 0.01;
    std::uint64_t seed = 0;
};

fs::path summary_path(const RmOptions& o) {
    if (!o.summary.empty()) return o.summary;
    fs::path p = o.out;
    p.replace_extension();
    p += ".summary.csv";
    return p;
}

int cmd_run_rm(const RmOptions& o) {
    if (o.K < 1) throw std::invalid_argument("--K must be at least 1");
    if (o.runs < 1) throw std::invalid_argument("--runs must be at least 1");
    if (o.algo != "branchvi" && o.algo != "euler" && o.algo != "egreedy")
        throw std::invalid_argument("unknown algo '" + o.algo + "'");
    const BranchingMdp mdp = load_model(o.model);
    if (const auto problems = validate(mdp); !problems.empty())
        throw std::invalid_argument("model fails validation: " + problems.front().message);

    const auto start = std::chrono::steady_clock::now();
    std::vector<RmTrace> traces(o.runs);
    parallel_for(o.runs, [&](std::size_t run) {
        RmConfig config{o.K, o.delta, replication_seed(o.seed, run)};
        if (o.algo == "branchvi")
            traces[run] = run_rm(mdp, config);
        else if (o.algo == "euler")
            traces[run] = run_euler_adaptation(mdp, config);
        else
            traces[run] = run_epsilon_greedy(mdp, config, o.explore);
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::ostringstream csv;
    csv << "run,episode,inst_regret,cum_regret,vbar1,vlow1\n";
    for (std::size_t run = 0; run < o.runs; ++run) {
        const auto& eps = traces[run].episodes;
        for (std::size_t k = 0; k < eps.size(); ++k) {
            const auto& e = eps[k];
            csv << run << ',' << k + 1 << ',' << fmt17(e.inst_regret) << ',' << fmt17(e.cum_regret) << ','
                << (e.upper1 ? fmt17(*e.upper1) : "") << ',' << (e.lower1 ? fmt17(*e.lower1) : "") << '\n';
        }
    }
    write_text(o.out, csv.str());

    std::ostringstream sum;
    sum << "episode,mean_inst_regret,se_inst_regret,mean_cum_regret,se_cum_regret\n";
    const double R = static_cast<double>(o.runs);
    auto mean_se = [&](std::size_t k, auto field) {
        double s = 0.0, s2 = 0.0;
        for (const auto& t : traces) {
            const double x = field(t.episodes[k]);
            s += x;
            s2 += x * x;
        }
        const double mean = s / R;
        const double var = o.runs > 1 ? std::max(0.0, (s2 - R * mean * mean) / (R - 1.0)) : 0.0;
        return std::pair{mean, std::sqrt(var / R)};
    };
    double final_mean = 0.0;
    for (std::size_t k = 0; k < o.K; ++k) {
        const auto [mi, si] = mean_se(k, [](const RmEpisode& e) { return e.inst_regret; });
        const auto [mc, sc] = mean_se(k, [](const RmEpisode& e) { return e.cum_regret; });
        sum << k + 1 << ',' << fmt17(mi) << ',' << fmt17(si) << ',' << fmt17(mc) << ',' << fmt17(sc) << '\n';
        final_mean = mc;
    }
    write_text(summary_path(o), sum.str());

    std::cout << "algo " << o.algo << "\nruns " << o.runs << "\nK " << o.K << "\noptimal_value "
              << fmt17(traces.front().optimal_value) << "\nmean_cum_regret " << fmt17(final_mean)
              << "\nwall_clock_seconds " << seconds << "\n";
    return kOk;
}

// ----------------------------------------------------------------- run-rfe

struct RfeOptions {
    std::string model, out;
    std::vector<std::string> rewards;
    double eps = 0.25, delta = 0.1;
    std::uint64_t seed = 0, max_episodes = 1'000'000;
};

int cmd_run_rfe(const RfeOptions& o) {
    const BranchingMdp mdp = load_model(o.model);
    if (const auto problems = validate(mdp); !problems.empty())
        throw std::invalid_argument("model fails validation: " + problems.front().message);
    // Load rewards first so a bad file fails before the long exploration.
    std::vector<std::vector<double>> tables;
    for (const auto& path : o.rewards) tables.push_back(load_rewards(path, mdp.S, mdp.N));

    const auto start = std::chrono::steady_clock::now();
    const RfeResult result = explore(mdp, {o.eps, o.delta, o.seed, o.max_episodes});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.out.empty()) save_model(o.out, result.estimate);
    std::cout << "stopped " << (result.stopped ? "true" : "false") << "\nepisodes_used " << result.episodes_used
              << "\nfinal_error " << fmt17(result.final_error) << "\nwall_clock_seconds " << seconds << "\n";
    if (!result.stopped) return kCapHit;

    for (std::size_t i = 0; i < tables.size(); ++i) {
        const PolicyTable policy = plan_for_rewards(result.estimate, tables[i]);
        const double gap = certify(mdp, policy, tables[i]);
        std::cout << "reward " << o.rewards[i] << " gap " << fmt17(gap) << " eps_optimal "
                  << (gap <= o.eps ? "true" : "false") << "\n";
    }
    return kOk;
}

// ------------------------------------------------------------ check-lemmas

struct Record {
    std::string name;
    double lhs, rhs, gap;
    bool pass;
};

class Report {
public:
    void add(std::string name, double lhs, double rhs, bool pass) {
        records_.push_back({std::move(name), lhs, rhs, std::abs(lhs - rhs), pass});
    }
    bool all_pass() const {
        return std::all_of(records_.begin(), records_.end(), [](const Record& r) { return r.pass; });
    }
    std::string text() const {
        std::ostringstream out;
        out << "name,lhs,rhs,gap,pass\n";
        for (const auto& r : records_)
            out << r.name << ',' << fmt17(r.lhs) << ',' << fmt17(r.rhs) << ',' << fmt17(r.gap) << ','
                << (r.pass ? "pass" : "fail") << '\n';
        return out.str();
    }

private:
    std::vector<Record> records_;
};

BranchingMdp random_partner(const BranchingMdp& base, std::uint64_t seed) {
    const BranchingMdp other = random_instance(base.S, base.N, base.m, base.H, seed);
    return with_rewards(other, base.r);
}

void preset_tiny_exact(Report& report, std::uint64_t seed) {
    for (std::uint64_t i = 0; i < 50; ++i) {
        const std::uint64_t s = seed + i;
        const BranchingMdp a = random_instance(3, 3, 2, 3, s);
        const BranchingMdp b = random_partner(a, s + 1'000'003);
        const PolicyTable pi = random_policy(a, s);
        const auto vd = check_value_difference(a, b, pi);
        report.add("value_difference/" + std::to_string(i), vd.lhs, vd.rhs, vd.gap <= 1e-9);

        const BranchingMdp tiny = random_instance(3, 3, 2, 2, s);
        const auto ltv = check_ltv(tiny, random_policy(tiny, s), LtvMode::Exact);
        report.add("ltv_exact/" + std::to_string(i), ltv.lhs, ltv.mid, ltv.equality_pass);
        report.add("ltv_exact_bound/" + std::to_string(i), ltv.mid, ltv.bound, ltv.bound_pass);
    }
}

void preset_paper_mc(Report& report, std::uint64_t seed) {
    const BranchingMdp mdp = experiment_instance(10);
    const PolicyTable pi = optimal_values(mdp).policy;
    const double H = static_cast<double>(mdp.H);
    const auto ltv = check_ltv(mdp, pi, LtvMode::MonteCarlo, 200'000, seed);
    report.add("ltv_mc", ltv.lhs, ltv.mid, ltv.equality_pass);
    report.add("ltv_mc_bound", ltv.mid, 3.0 * H * H, ltv.mid <= 3.0 * H * H + 4.0 * ltv.mid_stderr);

    const auto mom = check_triggered_moments(mdp, pi, 100'000, seed + 1);
    report.add("omega_mean", mom.mean, H, mom.mean_pass);
    report.add("omega_second_moment", mom.mean_sq, 3.0 * H * H, mom.sq_pass);

    for (std::size_t h : {3u, 6u}) {
        const BranchingMdp relaxed = critical_instance(4, 4, 2, h, seed + h);
        const auto m = check_triggered_moments(relaxed, random_policy(relaxed, seed + h), 100'000, seed + 10 + h);
        report.add("omega_relaxed_equality/H=" + std::to_string(h), m.mean, static_cast<double>(h),
                   m.relaxed_equality_pass.value_or(false));
    }
}

void preset_relaxed_witness(Report& report, std::uint64_t seed) {
    const double q_bar = 0.75, eta = 0.05;
    const std::size_t m = 2;
    double means[2];
    const std::size_t horizons[2] = {3, 6};
    for (int j = 0; j < 2; ++j) {
        const HardInstance inst = relaxed_instance(q_bar, 5, 4, m, horizons[j], eta, seed);
        const auto mom =
            check_triggered_moments(inst.mdp, hard_instance_optimal_policy(inst), 100'000, seed + j, true);
        means[j] = mom.mean;
    }
    report.add("omega_growth_H6_vs_H3", means[1], means[0], means[1] > means[0]);

    const HardInstance inst = relaxed_instance(q_bar, 5, 4, m, 6, eta, seed);
    const double measured = policy_value(inst.mdp, hard_instance_optimal_policy(inst)).at(1, inst.mdp.initial) -
                            policy_value(inst.mdp, hard_instance_suboptimal_policy(inst)).at(1, inst.mdp.initial);
    const double closed = hard_instance_gap(m, 6, q_bar, eta);
    report.add("relaxed_gap_closed_form", measured, closed, std::abs(measured - closed) <= 1e-9);
    // Same construction with q = 1/m loses only m eta (H - 1) per episode.
    const double bounded = hard_instance_gap(m, 6, 1.0 / static_cast<double>(m), eta);
    report.add("relaxed_gap_exceeds_bounded", measured, bounded, measured > bounded);
}

int cmd_check_lemmas(const std::string& preset, std::uint64_t seed, const std::string& out) {
    Report report;
    if (preset == "tiny-exact")
        preset_tiny_exact(report, seed);
    else if (preset == "paper-mc")
        preset_paper_mc(report, seed);
    else if (preset == "relaxed-witness")
        preset_relaxed_witness(report, seed);
    else
        throw std::invalid_argument("unknown preset '" + preset + "'");
    const std::string text = report.text();
    if (!out.empty()) write_text(out, text);
    std::cout << text;
    return report.all_pass() ? kOk : kFailed;
}

// --------------------------------------------------------------------- gen

struct GenOptions {
    std::string kind, out;
    std::size_t S = 5, N = 10, m = 2, H = 6;
    double eta = 0.1, q_bar = 0.75;
    std::uint64_t seed = 0;
};

int cmd_gen(const GenOptions& o) {
    BranchingMdp mdp;
    if (o.kind == "experiment") {
        mdp = experiment_instance(o.N);
    } else if (o.kind == "regret-lb" || o.kind == "relaxed") {
        const HardInstance inst = o.kind == "regret-lb" ? regret_lb_instance(o.S, o.N, o.m, o.H, o.eta, o.seed)
                                                        : relaxed_instance(o.q_bar, o.S, o.N, o.m, o.H, o.eta, o.seed);
        for (std::size_t i = 0; i < inst.optimal_block.size(); ++i)
            std::cout << "optimal_block state " << inst.bandit_state(i) << " block " << inst.optimal_block[i] << "\n";
        mdp = inst.mdp;
    } else if (o.kind == "random") {
        mdp = random_instance(o.S, o.N, o.m, o.H, o.seed);
    } else {
        throw std::invalid_argument("unknown kind '" + o.kind + "'");
    }
    save_model(o.out, mdp);
    std::cout << "wrote " << o.out << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Branching MDP learners and diagnostics"};
    app.require_subcommand(1);

    std::string model, policy, out, preset = "tiny-exact";
    auto* validate_cmd = app.add_subcommand("validate", "Check a model file");
    validate_cmd->add_option("--model", model)->required();

    auto* plan_cmd = app.add_subcommand("plan", "Optimal value and policy; optionally score a policy");
    plan_cmd->add_option("--model", model)->required();
    plan_cmd->add_option("--policy", policy);
    plan_cmd->add_option("--out", out, "Write the optimal policy here");

    RmOptions rm;
    auto* rm_cmd = app.add_subcommand("run-rm", "Regret minimization with replications");
    rm_cmd->add_option("--model", rm.model)->required();
    rm_cmd->add_option("--algo", rm.algo)->check(CLI::IsMember({"branchvi", "euler", "egreedy"}));
    rm_cmd->add_option("--K", rm.K);
    rm_cmd->add_option("--delta", rm.delta);
    rm_cmd->add_option("--runs", rm.runs);
    rm_cmd->add_option("--seed", rm.seed);
    rm_cmd->add_option("--explore", rm.explore, "egreedy exploration rate");
    rm_cmd->add_option("--out", rm.out)->required();
    rm_cmd->add_option("--summary", rm.summary, "Defaults to <out>.summary.csv");

    RfeOptions rfe;
    auto* rfe_cmd = app.add_subcommand("run-rfe", "Reward-free exploration, then plan for given rewards");
    rfe_cmd->add_option("--model", rfe.model)->required();
    rfe_cmd->add_option("--eps", rfe.eps);
    rfe_cmd->add_option("--delta", rfe.delta);
    rfe_cmd->add_option("--seed", rfe.seed);
    rfe_cmd->add_option("--max-episodes", rfe.max_episodes);
    rfe_cmd->add_option("--out", rfe.out, "Write the estimated model here");
    rfe_cmd->add_option("--reward", rfe.rewards)->take_all();

    std::uint64_t lemma_seed = 0;
    auto* lemmas_cmd = app.add_subcommand("check-lemmas", "Run a diagnostics corpus");
    lemmas_cmd->add_option("--preset", preset)->check(CLI::IsMember({"tiny-exact", "paper-mc", "relaxed-witness"}));
    lemmas_cmd->add_option("--seed", lemma_seed);
    lemmas_cmd->add_option("--out", out, "Report file");

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Write a generated instance");
    gen_cmd->add_option("--kind", gen.kind)->required()->check(
        CLI::IsMember({"experiment", "regret-lb", "relaxed", "random"}));
    gen_cmd->add_option("--S", gen.S);
    gen_cmd->add_option("--N", gen.N);
    gen_cmd->add_option("--m", gen.m);
    gen_cmd->add_option("--H", gen.H);
    gen_cmd->add_option("--eta", gen.eta);
    gen_cmd->add_option("--qbar", gen.q_bar);
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--out", gen.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*validate_cmd) return cmd_validate(model);
        if (*plan_cmd) return cmd_plan(model, policy, out);
        if (*rm_cmd) return cmd_run_rm(rm);
        if (*rfe_cmd) return cmd_run_rfe(rfe);
        if (*lemmas_cmd) return cmd_check_lemmas(preset, lemma_seed, out);
        if (*gen_cmd) return cmd_gen(gen);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kInputError;
    } catch (const InvalidPolicyError& e) {
        std::cerr << "invalid policy: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kInputError;
}
