#include "rtopk/surrogates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "rtopk/measures.hpp"

namespace rtopk {

namespace {

Eigen::VectorXd as_real(const RelevanceVector& r) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) v(static_cast<Eigen::Index>(i)) = r[i];
    return v;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& v) {
    const double mx = v.maxCoeff();
    Eigen::VectorXd e = (v.array() - mx).exp().matrix();
    return e / e.sum();
}

Eigen::VectorXd gains(const Eigen::VectorXd& r) { return ((r.array() * std::log(2.0)).exp() - 1.0).matrix(); }

void check_sizes(const Eigen::VectorXd& s, const Eigen::VectorXd& r) {
    if (s.size() != r.size()) throw InputError("surrogate: score and relevance sizes differ");
    if (!s.allFinite() || !r.allFinite()) throw InputError("surrogate: non-finite input");
}

double value_real(const SurrogateId& id, const Eigen::VectorXd& s, const Eigen::VectorXd& r) {
    check_sizes(s, r);
    switch (id.kind) {
        case SurrogateKind::Squared:
            return (s - r).squaredNorm();
        case SurrogateKind::RankSVM: {
            double total = 0.0;
            for (Eigen::Index i = 0; i < s.size(); ++i)
                for (Eigen::Index j = 0; j < s.size(); ++j)
                    if (r(i) > r(j)) total += std::max(0.0, 1.0 + s(j) - s(i));
            return total;
        }
        case SurrogateKind::KL: {
            const Eigen::ArrayXd er = r.array().exp();
            return (er * r.array() - er * s.array() - er + s.array().exp()).sum();
        }
        case SurrogateKind::SmoothDCG:
            return softmax(s / id.smoothing).dot(gains(r));
        case SurrogateKind::ListNetCE: {
            const Eigen::VectorXd pr = softmax(r);
            const double mx = s.maxCoeff();
            const double log_z = mx + std::log((s.array() - mx).exp().sum());
            return -(pr.array() * (s.array() - log_z)).sum();
        }
    }
    throw InputError("surrogate: unknown id");
}

// Per-coordinate term of the SmoothDCG gradient without the G(R_i) factor.
Eigen::VectorXd smooth_dcg_term(const Eigen::VectorXd& q, Eigen::Index i, double eps) {
    Eigen::VectorXd h = -q(i) * q;
    h(i) += q(i);
    return h / eps;
}

// Pairwise hinge term h_{s,i,j}.
void add_hinge_term(Eigen::VectorXd& out, const Eigen::VectorXd& s, double ri, double rj, Eigen::Index i,
                    Eigen::Index j) {
    if (ri > rj && 1.0 + s(j) > s(i)) {
        out(j) += 1.0;
        out(i) -= 1.0;
    }
}

Eigen::VectorXd gradient_real(const SurrogateId& id, const Eigen::VectorXd& s, const Eigen::VectorXd& r) {
    check_sizes(s, r);
    switch (id.kind) {
        case SurrogateKind::Squared:
            return 2.0 * (s - r);
        case SurrogateKind::RankSVM: {
            Eigen::VectorXd g = Eigen::VectorXd::Zero(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i)
                for (Eigen::Index j = 0; j < s.size(); ++j) add_hinge_term(g, s, r(i), r(j), i, j);
            return g;
        }
        case SurrogateKind::KL:
            return (s.array().exp() - r.array().exp()).matrix();
        case SurrogateKind::SmoothDCG: {
            const Eigen::VectorXd q = softmax(s / id.smoothing);
            const Eigen::VectorXd g = gains(r);
            Eigen::VectorXd out = Eigen::VectorXd::Zero(s.size());
            for (Eigen::Index i = 0; i < s.size(); ++i)
                if (g(i) != 0.0) out += g(i) * smooth_dcg_term(q, i, id.smoothing);
            return out;
        }
        case SurrogateKind::ListNetCE:
            return softmax(s) - softmax(r);
    }
    throw InputError("surrogate: unknown id");
}

}  // namespace

std::size_t SurrogateId::required_k(std::size_t m) const noexcept {
    switch (kind) {
        case SurrogateKind::RankSVM: return 2;
        case SurrogateKind::ListNetCE: return m;
        default: return 1;
    }
}

std::string SurrogateId::name() const {
    switch (kind) {
        case SurrogateKind::Squared: return "squared";
        case SurrogateKind::RankSVM: return "ranksvm";
        case SurrogateKind::KL: return "kl";
        case SurrogateKind::SmoothDCG: return "smoothdcg";
        case SurrogateKind::ListNetCE: return "listnet";
    }
    return "?";
}

SurrogateId SurrogateId::parse(const std::string& text) {
    std::string t;
    for (char c : text) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "squared" || t == "sq") return squared();
    if (t == "ranksvm" || t == "svm") return ranksvm();
    if (t == "kl") return kl();
    if (t == "smoothdcg" || t == "sd") return smooth_dcg();
    if (t == "listnet") return listnet();
    throw ConfigError("unknown surrogate '" + text + "'");
}

double value(const SurrogateId& id, const Eigen::VectorXd& s, const RelevanceVector& r) {
    return value_real(id, s, as_real(r));
}

Eigen::VectorXd gradient(const SurrogateId& id, const Eigen::VectorXd& s, const RelevanceVector& r) {
    return gradient_real(id, s, as_real(r));
}

Propensities Propensities::make(double gamma, std::size_t m, std::size_t top1, std::size_t top2) {
    if (!(gamma > 0.0 && gamma < 0.5)) throw ConfigError("propensities: gamma must lie in (0, 1/2)");
    if (m < 2 || top1 >= m || top2 >= m || top1 == top2)
        throw InputError("propensities: need m >= 2 and distinct in-range top items");
    return Propensities{gamma, m, top1, top2};
}

Propensities Propensities::boosted(double factor) const {
    Propensities p = *this;
    p.gamma = std::min(1.0, gamma * factor);
    return p;
}

double propensity_top1(const Propensities& pr, std::size_t item) {
    if (item >= pr.m) throw InputError("propensity_top1: item out of range");
    const double base = pr.gamma / static_cast<double>(pr.m);
    return item == pr.top1 ? 1.0 - pr.gamma + base : base;
}

double propensity_top2(const Propensities& pr, std::size_t a, std::size_t b) {
    if (a >= pr.m || b >= pr.m || a == b) throw InputError("propensity_top2: need distinct in-range items");
    const double base = pr.gamma / (static_cast<double>(pr.m) * static_cast<double>(pr.m - 1));
    return (a == pr.top1 && b == pr.top2) ? 1.0 - pr.gamma + base : base;
}

Eigen::VectorXd estimate_score_gradient(const SurrogateId& id, const Eigen::VectorXd& s,
                                        const TopKFeedback& fb, const Propensities& pr) {
    const std::size_t m = static_cast<std::size_t>(s.size());
    if (id.kind == SurrogateKind::ListNetCE)
        throw ContractError("estimator: ListNet cross-entropy admits no top-k unbiased estimator");
    if (fb.perm.size() != m || pr.m != m) throw InputError("estimator: size mismatch");
    if (fb.k < id.required_k(m) || fb.revealed.size() != fb.k)
        throw ContractError("estimator: " + id.name() + " needs top-" + std::to_string(id.required_k(m)) +
                            " feedback");

    if (fb.k == m) {
        // Every coordinate observed: the sum over all orderings has total
        // probability 1, so the estimator is the gradient itself.
        Eigen::VectorXd r(static_cast<Eigen::Index>(m));
        for (std::size_t j = 0; j < m; ++j) r(static_cast<Eigen::Index>(fb.perm.item_at(j))) = fb.revealed[j];
        return gradient_real(id, s, r);
    }

    const auto a = static_cast<Eigen::Index>(fb.perm.item_at(0));
    const double ra = fb.revealed[0];
    switch (id.kind) {
        case SurrogateKind::Squared: {
            Eigen::VectorXd z = 2.0 * s;
            z(a) -= 2.0 * ra / propensity_top1(pr, static_cast<std::size_t>(a));
            return z;
        }
        case SurrogateKind::KL: {
            Eigen::VectorXd z = Eigen::VectorXd::Zero(s.size());
            z(a) = (std::exp(s(a)) - std::exp(ra)) / propensity_top1(pr, static_cast<std::size_t>(a));
            return z;
        }
        case SurrogateKind::SmoothDCG: {
            const Eigen::VectorXd q = softmax(s / id.smoothing);
            const double g = dcg_gain(fb.revealed[0]);
            return (g / propensity_top1(pr, static_cast<std::size_t>(a))) * smooth_dcg_term(q, a, id.smoothing);
        }
        case SurrogateKind::RankSVM: {
            const auto b = static_cast<Eigen::Index>(fb.perm.item_at(1));
            const double rb = fb.revealed[1];
            Eigen::VectorXd num = Eigen::VectorXd::Zero(s.size());
            add_hinge_term(num, s, ra, rb, a, b);
            add_hinge_term(num, s, rb, ra, b, a);
            const double den = propensity_top2(pr, static_cast<std::size_t>(a), static_cast<std::size_t>(b)) +
                               propensity_top2(pr, static_cast<std::size_t>(b), static_cast<std::size_t>(a));
            return num / den;
        }
        case SurrogateKind::ListNetCE:
            break;
    }
    throw ContractError("estimator: unsupported surrogate");
}

Eigen::VectorXd estimate_gradient(const SurrogateId& id, const Eigen::VectorXd& s, const TopKFeedback& fb,
                                  const Propensities& pr, const FeatureMatrix& x) {
    if (x.rows() != s.size()) throw InputError("estimator: feature rows must equal list length");
    return x.transpose() * estimate_score_gradient(id, s, fb, pr);
}

double operator_norm_1_to_2(const FeatureMatrix& x) {
    if (x.rows() == 0) return 0.0;
    return x.rowwise().norm().maxCoeff();
}

double second_moment_constant(const SurrogateId& id, std::size_t m, double r_d, double u, double r_max) {
    const double md = static_cast<double>(m);
    switch (id.kind) {
        case SurrogateKind::Squared:
            return std::pow(md, 4) * std::pow(r_d, 4) * u * u * r_max * r_max;
        case SurrogateKind::RankSVM:
            return 16.0 * std::pow(md, 4) * r_d * r_d;
        case SurrogateKind::KL:
            // |exp(s) - exp(R)| <= exp(max(R_D U, R_max)); the R_max term matters for graded labels.
            return md * md * r_d * r_d * std::exp(2.0 * std::max(r_d * u, r_max));
        case SurrogateKind::SmoothDCG: {
            const double peak = 2.0 * dcg_gain(static_cast<int>(std::lround(r_max))) / id.smoothing;
            return md * md * r_d * r_d * peak * peak;
        }
        case SurrogateKind::ListNetCE:
            break;
    }
    throw ContractError("second_moment_constant: no estimator for " + id.name());
}

DecomposabilityReport decomposability_counterexamples() {
    DecomposabilityReport rep;
    const Eigen::Vector3d s(1.0, 0.0, 0.0);
    const Eigen::Vector3d cases[4] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 1}, {1, 1, 1}};
    for (int c = 0; c < 4; ++c) rep.svm_coeff[c] = gradient_real(SurrogateId::ranksvm(), s, cases[c])(0);
    rep.svm_delta_first = rep.svm_coeff[0] - rep.svm_coeff[1];
    rep.svm_delta_second = rep.svm_coeff[2] - rep.svm_coeff[3];

    auto mixed = [&](const SurrogateId& id) {
        const Eigen::Vector3d r0(0.3, 0.5, 0.1);
        const double h = 1e-4;
        auto coeff = [&](double d1, double d2) {
            Eigen::Vector3d r = r0;
            r(0) += d1;
            r(1) += d2;
            return gradient_real(id, s, r)(0);
        };
        return (coeff(h, h) - coeff(h, -h) - coeff(-h, h) + coeff(-h, -h)) / (4.0 * h * h);
    };
    rep.listnet_mixed_partial = mixed(SurrogateId::listnet());
    rep.squared_mixed_partial = mixed(SurrogateId::squared());
    return rep;
}

}  // namespace rtopk
