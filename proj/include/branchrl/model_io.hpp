#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "branchrl/core.hpp"

namespace branchrl {

/// Malformed input file. The message names the offending field or the byte
/// offset of a syntax error.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Model files are JSON objects with fields S, N, m, H, ending, initial,
// q (S x N), p (S x N x S), r (S x N), action_class, assumption1_enforced.
// action_class is {"kind": "top_m"} | {"kind": "partition", "blocks": [...]}
// | {"kind": "explicit", "actions": [...]}.
BranchingMdp parse_model(const std::string& text);
std::string dump_model(const BranchingMdp& mdp);
BranchingMdp load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const BranchingMdp& mdp);

// Policy files: {"H": H, "S": S, "policy": [[[members of pi_h(s)] for s] for h]}.
PolicyTable parse_policy(const std::string& text);
std::string dump_policy(const PolicyTable& policy);
PolicyTable load_policy(const std::filesystem::path& path);
void save_policy(const std::filesystem::path& path, const PolicyTable& policy);

// Reward files: {"r": S x N matrix}.
std::vector<double> load_rewards(const std::filesystem::path& path, std::size_t S, std::size_t N);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace branchrl
