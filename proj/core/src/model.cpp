#include "binar/model.hpp"

#include <cmath>
#include <sstream>

#include "binar/errors.hpp"

namespace binar {

std::string to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Bernoulli: return "bernoulli";
        case FamilyKind::Poisson: return "poisson";
    }
    return "unknown";
}

FamilyKind family_kind_from_string(const std::string& name) {
    if (name == "bernoulli") return FamilyKind::Bernoulli;
    if (name == "poisson") return FamilyKind::Poisson;
    throw InvalidParameter("unknown offspring family '" + name + "' (expected bernoulli or poisson)");
}

OffspringFamily OffspringFamily::make(FamilyKind kind, double mean) {
    if (!std::isfinite(mean) || mean <= 0.0 || mean >= 1.0) {
        std::ostringstream os;
        os << to_string(kind) << " offspring mean must lie in (0, 1), got " << mean;
        throw InvalidParameter(os.str());
    }
    return OffspringFamily(kind, mean);
}

OffspringFamily OffspringFamily::bernoulli(double p) { return make(FamilyKind::Bernoulli, p); }

OffspringFamily OffspringFamily::poisson(double lambda) { return make(FamilyKind::Poisson, lambda); }

double OffspringFamily::variance() const noexcept {
    return kind_ == FamilyKind::Bernoulli ? mean_ * (1.0 - mean_) : mean_;
}

namespace {

double poisson_central_moment(double lambda, int order) {
    switch (order) {
        case 1: return 0.0;
        case 2: return lambda;
        case 3: return lambda;
        case 4: return lambda + 3.0 * lambda * lambda;
        case 6: return lambda + 25.0 * lambda * lambda + 15.0 * lambda * lambda * lambda;
        default: break;
    }
    throw InvalidParameter("unsupported central moment order " + std::to_string(order));
}

double bernoulli_central_moment(double p, int order) {
    const double q = 1.0 - p;
    switch (order) {
        case 1: return 0.0;
        case 2: return p * q;
        case 3: return p * q * (q - p);
        case 4: return p * q * (1.0 - 3.0 * p * q);
        case 6: return p * q * (std::pow(p, 5) + std::pow(q, 5));
        default: break;
    }
    throw InvalidParameter("unsupported central moment order " + std::to_string(order));
}

}  // namespace

double family_central_moment(const OffspringFamily& family, int order) {
    return family.kind() == FamilyKind::Bernoulli ? bernoulli_central_moment(family.mean(), order)
                                                  : poisson_central_moment(family.mean(), order);
}

void ImmigrationSpec::validate() const {
    for (double l : {lambda0, lambda1, lambda2}) {
        if (!std::isfinite(l) || l < 0.0) {
            std::ostringstream os;
            os << "immigration rates must be finite and nonnegative, got (" << lambda0 << ", " << lambda1
               << ", " << lambda2 << ")";
            throw InvalidParameter(os.str());
        }
    }
}

ModelParams::ModelParams(OffspringFamily offspring_a, OffspringFamily offspring_b, ImmigrationSpec immigration,
                         std::int64_t x1)
    : offspring_a_(offspring_a), offspring_b_(offspring_b), immigration_(immigration), x1_(x1) {
    const double top = std::max(offspring_a_.mean(), offspring_b_.mean());
    if (!(top > 0.0 && top < 1.0)) throw InvalidParameter("stability requires 0 < max(a, b) < 1");
    immigration_.validate();
    if (x1_ < 0) throw InvalidParameter("ancestor value x1 must be nonnegative");
}

ModelParams reference_params() {
    return ModelParams(OffspringFamily::bernoulli(0.5), OffspringFamily::bernoulli(0.5),
                       ImmigrationSpec{0.3, 0.7, 0.7}, 1);
}

DerivedMoments derive_moments(const ModelParams& params) {
    const auto& fa = params.offspring_a();
    const auto& fb = params.offspring_b();
    const auto& im = params.immigration();

    DerivedMoments m;
    m.a = fa.mean();
    m.b = fb.mean();
    m.sigma_a2 = family_central_moment(fa, 2);
    m.sigma_b2 = family_central_moment(fb, 2);
    m.mu_a4 = family_central_moment(fa, 4);
    m.mu_b4 = family_central_moment(fb, 4);
    m.tau_a6 = family_central_moment(fa, 6);
    m.tau_b6 = family_central_moment(fb, 6);

    // Both immigration marginals are Poisson.
    m.c = im.mean_even();
    m.d = im.mean_odd();
    m.sigma_c2 = m.c;
    m.sigma_d2 = m.d;
    m.mu_c4 = poisson_central_moment(m.c, 4);
    m.mu_d4 = poisson_central_moment(m.d, 4);
    m.tau_c6 = poisson_central_moment(m.c, 6);
    m.tau_d6 = poisson_central_moment(m.d, 6);
    m.rho = im.lambda0;
    const double l0 = im.lambda0;
    m.nu2 = (l0 + 3.0 * l0 * l0) + l0 * (im.lambda1 + im.lambda2) + im.lambda1 * im.lambda2;

    m.a_bar = 0.5 * (m.a + m.b);
    m.a2_bar = 0.5 * (m.a * m.a + m.b * m.b);
    m.c_bar = 0.5 * (m.c + m.d);
    m.c2_bar = 0.5 * (m.sigma_c2 + m.sigma_d2 + m.c * m.c + m.d * m.d);
    m.upsilon = (m.sigma_a2 + m.sigma_b2) / (2.0 * (m.a_bar - m.a2_bar));
    return m;
}

bool HypothesisReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string HypothesisReport::failures() const {
    std::string out;
    for (const auto& c : checks) {
        if (c.passed) continue;
        if (!out.empty()) out += "; ";
        out += c.id + ": " + c.condition;
    }
    return out;
}

HypothesisReport validate_hypotheses(const DerivedMoments& m) {
    HypothesisReport r;
    auto add = [&](std::string id, std::string cond, bool ok, bool structural = false) {
        r.checks.push_back({std::move(id), std::move(cond), ok, structural});
    };

    add("stability", "0 < max(a,b) < 1 and a,b >= 0",
        m.a >= 0.0 && m.b >= 0.0 && std::max(m.a, m.b) > 0.0 && std::max(m.a, m.b) < 1.0);
    add("offspring", "sigma_a^2 > 0 and sigma_b^2 > 0", m.sigma_a2 > 0.0 && m.sigma_b2 > 0.0);
    add("H.1", "E[eps_even|F] = c, E[eps_odd|F] = d (immigration independent of the past)", true, true);
    add("H.2", "sigma_c^2 > 0 and sigma_d^2 > 0", m.sigma_c2 > 0.0 && m.sigma_d2 > 0.0);
    add("H.3", "rho^2 < sigma_c^2 sigma_d^2", m.rho * m.rho < m.sigma_c2 * m.sigma_d2);
    add("H.4", "mu_c^4 > sigma_c^4 and mu_d^4 > sigma_d^4",
        m.mu_c4 > m.sigma_c2 * m.sigma_c2 && m.mu_d4 > m.sigma_d2 * m.sigma_d2);
    add("H.4", "(nu^2)^2 <= mu_c^4 mu_d^4", m.nu2 * m.nu2 <= m.mu_c4 * m.mu_d4);
    add("H.5", "tau_c^6 > 0 and tau_d^6 > 0", m.tau_c6 > 0.0 && m.tau_d6 > 0.0);
    add("H.5", "sup E[eps^8] < inf (Poisson immigration, Bernoulli/Poisson offspring)", true, true);
    add("aggregates", "0 < a_bar < 1, 0 < a2_bar < 1, upsilon > 0",
        m.a_bar > 0.0 && m.a_bar < 1.0 && m.a2_bar > 0.0 && m.a2_bar < 1.0 && m.upsilon > 0.0);
    return r;
}

void require_hypotheses(const DerivedMoments& m) {
    const auto report = validate_hypotheses(m);
    if (!report.all_passed()) throw HypothesisViolation("moment hypotheses violated: " + report.failures());
}

}  // namespace binar
