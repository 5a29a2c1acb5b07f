#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "binar/model.hpp"
#include "binar/rng.hpp"

namespace binar {

// Binary-tree labelling: node 1 is the ancestor, the children of k are 2k and
// 2k + 1, generation r holds labels 2^r .. 2^(r+1) - 1. All functions throw
// OutOfRangeError for labels < 1.
std::uint64_t mother(std::uint64_t k);
std::pair<std::uint64_t, std::uint64_t> children(std::uint64_t k);
int generation_of(std::uint64_t k);

/// |G_r| = 2^r.
constexpr std::uint64_t generation_size(int r) { return std::uint64_t{1} << r; }
/// |T_n| = 2^(n+1) - 1.
constexpr std::uint64_t subtree_size(int n) { return (std::uint64_t{1} << (n + 1)) - 1; }

inline constexpr int kDefaultMaxDepth = 24;

/// Values X_k of a complete tree T_n, stored flat by label (slot 0 unused).
class BinarTree {
public:
    /// `values` indexed by label, with values.size() == 2^(depth+1). Throws
    /// ValidationError on a size mismatch or a negative entry.
    BinarTree(int depth, std::vector<std::int64_t> values);

    int depth() const noexcept { return depth_; }
    std::uint64_t node_count() const noexcept { return subtree_size(depth_); }

    /// Throws OutOfRangeError outside 1 .. node_count().
    std::int64_t at(std::uint64_t label) const;
    std::int64_t operator[](std::uint64_t label) const noexcept { return values_[label]; }

    /// X over G_r; throws OutOfRangeError when r > depth.
    std::span<const std::int64_t> generation(int r) const;
    /// X over labels 1 .. node_count().
    std::span<const std::int64_t> labelled() const noexcept {
        return std::span<const std::int64_t>(values_).subspan(1);
    }

    friend bool operator==(const BinarTree&, const BinarTree&) = default;

private:
    int depth_;
    std::vector<std::int64_t> values_;
};

/// Throws CapacityError when depth exceeds max_depth.
void check_capacity(int depth, int max_depth = kDefaultMaxDepth);

/// Generates T_depth. Node k draws from rng.derive(k): one immigration pair,
/// then the a-thinning for child 2k, then the b-thinning for child 2k + 1.
BinarTree simulate_tree(const ModelParams& params, int depth, const RngStream& rng,
                        int max_depth = kDefaultMaxDepth);

/// Values of the process along a uniformly random branch.
struct BranchPath {
    std::vector<std::int64_t> values;   // Y_1 .. Y_{steps+1}
    std::vector<std::uint8_t> selectors;  // kappa_1 .. kappa_steps; 1 selects (b, odd immigration)
};

BranchPath simulate_branch(const ModelParams& params, int steps, RngStream& rng);

/// Terminal value of simulate_branch without storing the path.
std::int64_t branch_terminal(const ModelParams& params, int steps, RngStream& rng);

/// Number of series terms K such that a_bar^K * c_bar / (1 - a_bar) < tail_tol.
int truncation_depth(double a_bar, double c_bar, double tail_tol);

/// Samples the limit variable T = sum_{k>=2} a_2 o ... o a_{k-1} o e_k, truncated
/// after truncation_depth() terms. Evaluated innermost-first,
/// T = e_2 + a_2 o (e_3 + a_3 o (...)), which has the same law as the series
/// because thinning distributes over independent sums. a_k and e_k share the
/// fair-coin selector of step k.
class LimitVariableSampler {
public:
    LimitVariableSampler(const ModelParams& params, double tail_tol);

    std::int64_t operator()(RngStream& rng) const;
    int terms() const noexcept { return terms_; }

private:
    OffspringFamily offspring_a_;
    OffspringFamily offspring_b_;
    ImmigrationSpec immigration_;
    int terms_;
};

std::int64_t sample_T(const ModelParams& params, double tail_tol, RngStream& rng);

}  // namespace binar
