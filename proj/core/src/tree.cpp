#include "binar/tree.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "binar/errors.hpp"

namespace binar {

namespace {

void require_label(std::uint64_t k) {
    if (k < 1) throw OutOfRangeError("node labels start at 1");
}

}  // namespace

std::uint64_t mother(std::uint64_t k) {
    require_label(k);
    if (k == 1) throw OutOfRangeError("the ancestor has no mother");
    return k / 2;
}

std::pair<std::uint64_t, std::uint64_t> children(std::uint64_t k) {
    require_label(k);
    if (k > (std::uint64_t{1} << 62)) throw OutOfRangeError("label too large: " + std::to_string(k));
    return {2 * k, 2 * k + 1};
}

int generation_of(std::uint64_t k) {
    require_label(k);
    return std::bit_width(k) - 1;
}

BinarTree::BinarTree(int depth, std::vector<std::int64_t> values) : depth_(depth), values_(std::move(values)) {
    if (depth_ < 0 || depth_ > 62) throw ValidationError("tree depth out of range: " + std::to_string(depth_));
    if (values_.size() != subtree_size(depth_) + 1)
        throw ValidationError("tree of depth " + std::to_string(depth_) + " needs " +
                              std::to_string(subtree_size(depth_)) + " values, got " +
                              std::to_string(values_.empty() ? 0 : values_.size() - 1));
    values_[0] = 0;
    for (std::size_t k = 1; k < values_.size(); ++k)
        if (values_[k] < 0) throw ValidationError("negative value at label " + std::to_string(k));
}

std::int64_t BinarTree::at(std::uint64_t label) const {
    if (label < 1 || label > node_count())
        throw OutOfRangeError("label " + std::to_string(label) + " outside tree of " + std::to_string(node_count()) +
                              " nodes");
    return values_[label];
}

std::span<const std::int64_t> BinarTree::generation(int r) const {
    if (r < 0 || r > depth_)
        throw OutOfRangeError("generation " + std::to_string(r) + " outside tree of depth " + std::to_string(depth_));
    return std::span<const std::int64_t>(values_).subspan(generation_size(r), generation_size(r));
}

void check_capacity(int depth, int max_depth) {
    if (depth < 0) throw ValidationError("depth must be nonnegative");
    if (depth > max_depth)
        throw CapacityError("depth " + std::to_string(depth) + " exceeds the memory budget (max depth " +
                            std::to_string(max_depth) + ", " + std::to_string(subtree_size(max_depth)) +
                            " nodes)");
}

BinarTree simulate_tree(const ModelParams& params, int depth, const RngStream& rng, int max_depth) {
    check_capacity(depth, max_depth);
    std::vector<std::int64_t> x(subtree_size(depth) + 1, 0);
    x[1] = params.x1();
    const std::uint64_t mothers = subtree_size(depth - 1);
    for (std::uint64_t k = 1; k <= mothers && depth > 0; ++k) {
        RngStream node = rng.derive(k);
        const ImmigrationPair eps = sample_immigration_pair(params.immigration(), node);
        x[2 * k] = thin(params.offspring_a(), x[k], node) + eps.even;
        x[2 * k + 1] = thin(params.offspring_b(), x[k], node) + eps.odd;
    }
    return BinarTree(depth, std::move(x));
}

namespace {

// One transition of the branch process; returns the selector used.
std::uint8_t branch_step(const ModelParams& params, std::int64_t& y, RngStream& rng) {
    const std::uint8_t kappa = static_cast<std::uint8_t>(rng() >> 63);
    const OffspringFamily& family = kappa ? params.offspring_b() : params.offspring_a();
    y = thin(family, y, rng) + sample_immigration(params.immigration(), kappa != 0, rng);
    return kappa;
}

}  // namespace

BranchPath simulate_branch(const ModelParams& params, int steps, RngStream& rng) {
    if (steps < 1) throw ValidationError("branch needs at least one step");
    BranchPath path;
    path.values.reserve(steps + 1);
    path.selectors.reserve(steps);
    std::int64_t y = params.x1();
    path.values.push_back(y);
    for (int i = 0; i < steps; ++i) {
        path.selectors.push_back(branch_step(params, y, rng));
        path.values.push_back(y);
    }
    return path;
}

std::int64_t branch_terminal(const ModelParams& params, int steps, RngStream& rng) {
    if (steps < 1) throw ValidationError("branch needs at least one step");
    std::int64_t y = params.x1();
    for (int i = 0; i < steps; ++i) branch_step(params, y, rng);
    return y;
}

int truncation_depth(double a_bar, double c_bar, double tail_tol) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw InvalidParameter("tail tolerance must lie in (0, 1)");
    if (!(a_bar > 0.0 && a_bar < 1.0)) throw InvalidParameter("mean offspring must lie in (0, 1)");
    if (c_bar <= 0.0) return 0;
    const double head = c_bar / (1.0 - a_bar);
    int k = 0;
    double tail = head;
    while (tail >= tail_tol) {
        tail *= a_bar;
        ++k;
    }
    return k;
}

LimitVariableSampler::LimitVariableSampler(const ModelParams& params, double tail_tol)
    : offspring_a_(params.offspring_a()),
      offspring_b_(params.offspring_b()),
      immigration_(params.immigration()),
      terms_(truncation_depth(0.5 * (params.offspring_a().mean() + params.offspring_b().mean()),
                              0.5 * (params.immigration().mean_even() + params.immigration().mean_odd()),
                              tail_tol)) {}

std::int64_t LimitVariableSampler::operator()(RngStream& rng) const {
    std::int64_t acc = 0;
    for (int i = 0; i < terms_; ++i) {
        const bool odd = (rng() >> 63) != 0;
        acc = thin(odd ? offspring_b_ : offspring_a_, acc, rng) + sample_immigration(immigration_, odd, rng);
    }
    return acc;
}

std::int64_t sample_T(const ModelParams& params, double tail_tol, RngStream& rng) {
    return LimitVariableSampler(params, tail_tol)(rng);
}

}  // namespace binar
