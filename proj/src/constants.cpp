#include "ustat/constants.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ustat/orlicz.hpp"
#include "ustat/reduce.hpp"

namespace ustat {

std::string LambdaProfile::to_jsonl() const {
    nlohmann::json j;
    j["lambda_half"] = lambda_half;
    j["lambda_one"] = lambda_one;
    j["lambda_alpha"] = lambda_alpha;
    j["lambda_beta"] = lambda_beta;
    j["lambda_2"] = lambda_2;
    j["lambda_32_alpha"] = lambda_32_alpha;
    j["lambda_32_beta"] = lambda_32_beta;
    j["lambda_alpha_star"] = lambda_alpha_star;
    j["lambda_beta_star"] = lambda_beta_star;
    j["alpha"] = alpha;
    j["beta"] = beta;
    j["alpha_star"] = alpha_star;
    j["beta_star"] = beta_star;
    j["k_f"] = k_f;
    j["k_g"] = k_g;
    j["c_phi"] = c_phi;
    j["c_psi"] = c_psi;
    j["b_w"] = b_w;
    j["n"] = n;
    j["notes"] = notes;
    return j.dump();
}

EstimateResult lambda_half(const KernelFamily& kernel,
                           const std::vector<DistributionSpec>& laws,
                           const ExpectationMode& mode) {
    const int n = static_cast<int>(laws.size());
    if (n < 2) throw std::invalid_argument("lambda_half: need n >= 2 laws");
    EstimateResult res;
    if (mode.exact_mode()) {
        const AtomCache cache = AtomCache::build(laws, mode);
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                for (std::size_t a = 0; a < cache.size(i); ++a)
                    for (std::size_t b = 0; b < cache.size(j); ++b) {
                        const double f =
                            kernel.evaluate(i, j, cache.atom(i, a), cache.atom(j, b));
                        sum += cache.prob(i, a) * cache.prob(j, b) * f * f;
                    }
            }
        res.value = std::sqrt(sum);
        res.exact = true;
        return res;
    }
    const int reps = std::max(mode.samples, 64);
    std::vector<double> per_rep(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const SampleBatch z = sample_batch(laws, mode.seed, static_cast<std::uint64_t>(r),
                                           kStreamZ);
        const SampleBatch zp = sample_batch(laws, mode.seed, static_cast<std::uint64_t>(r),
                                            kStreamZPrime);
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const double f = kernel.evaluate(i, j, z.row(i), zp.row(j));
                s += f * f;
            }
        per_rep[static_cast<std::size_t>(r)] = s;
    }
    const double mean = reduce::pairwise_sum(per_rep) / reps;
    double var = 0.0;
    for (double v : per_rep) var += (v - mean) * (v - mean);
    var /= std::max(1, reps - 1);
    const double se_mean = std::sqrt(var / reps);
    // Divergence guard: the half-sample mean should agree with the full mean.
    const double half_mean =
        reduce::pairwise_sum({per_rep.data(), per_rep.size() / 2}) /
        static_cast<double>(reps / 2);
    if (std::abs(half_mean - mean) > 8.0 * se_mean + 1e-9 * std::abs(mean) + 1e-12)
        throw std::runtime_error("lambda_half: second moment estimate diverging");
    res.value = std::sqrt(std::max(0.0, mean));
    res.se = res.value > 0.0 ? se_mean / (2.0 * res.value) : std::sqrt(se_mean);
    res.exact = false;
    return res;
}

namespace {

struct BlockLayout {
    std::vector<int> offset;
    int dim = 0;
};

BlockLayout layout_of(const AtomCache& cache) {
    BlockLayout lay;
    lay.offset.resize(static_cast<std::size_t>(cache.n()) + 1, 0);
    for (int i = 0; i < cache.n(); ++i)
        lay.offset[static_cast<std::size_t>(i) + 1] =
            lay.offset[static_cast<std::size_t>(i)] + static_cast<int>(cache.size(i));
    lay.dim = lay.offset.back();
    return lay;
}

OperatorNormResult largest_singular_value(const Eigen::MatrixXd& m) {
    OperatorNormResult res;
    const int dim = static_cast<int>(m.rows());
    if (dim == 0) return res;
    Eigen::VectorXd v = Eigen::VectorXd::Constant(dim, 1.0 / std::sqrt(dim));
    double lam = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < 100000; ++it) {
        Eigen::VectorXd y = m.transpose() * (m * v);
        const double norm = y.norm();
        if (norm == 0.0) {  // started orthogonal to the range, or m == 0
            res.value = m.norm() == 0.0 ? 0.0 : -1.0;
            converged = m.norm() == 0.0;
            break;
        }
        y /= norm;
        const double lam_new = (m * y).squaredNorm();
        if (std::abs(lam_new - lam) <= 1e-10 * std::max(1.0, lam_new)) {
            lam = lam_new;
            v = y;
            converged = true;
            break;
        }
        lam = lam_new;
        v = y;
    }
    res.iterations = it;
    res.converged = converged;
    res.value = converged ? std::sqrt(std::max(0.0, lam)) : 0.0;
    if (!converged || dim <= 512) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
        res.dense_value = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        res.dense_checked = true;
        if (!converged) {
            res.value = res.dense_value;
            res.converged = true;
        }
    }
    return res;
}

}  // namespace

OperatorNormResult operator_norm(const KernelFamily& kernel,
                                 const std::vector<DistributionSpec>& laws) {
    const AtomCache cache = AtomCache::build(laws, ExpectationMode::exact());
    const BlockLayout lay = layout_of(cache);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(lay.dim, lay.dim);
    const int n = cache.n();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            for (std::size_t a = 0; a < cache.size(i); ++a)
                for (std::size_t b = 0; b < cache.size(j); ++b) {
                    m(lay.offset[static_cast<std::size_t>(i)] + static_cast<int>(a),
                      lay.offset[static_cast<std::size_t>(j)] + static_cast<int>(b)) =
                        kernel.evaluate(i, j, cache.atom(i, a), cache.atom(j, b)) *
                        std::sqrt(cache.prob(i, a) * cache.prob(j, b));
                }
        }
    return largest_singular_value(m);
}

OperatorNormResult operator_norm_restricted(
    const KernelFamily& kernel, const std::vector<DistributionSpec>& laws,
    const std::vector<std::vector<std::function<double(std::span<const double>)>>>& basis,
    const ExpectationMode& mode) {
    if (basis.size() != laws.size())
        throw std::invalid_argument("restricted operator norm: one dictionary per index");
    const AtomCache cache = AtomCache::build(laws, mode);
    const int n = cache.n();
    std::vector<int> offset(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        if (basis[static_cast<std::size_t>(i)].empty())
            throw std::invalid_argument("restricted operator norm: empty dictionary");
        offset[static_cast<std::size_t>(i) + 1] =
            offset[static_cast<std::size_t>(i)] +
            static_cast<int>(basis[static_cast<std::size_t>(i)].size());
    }
    const int dim = offset.back();

    // Per-index whitening: gamma_i = sum_a c_a g_a with E gamma_i^2 = c' G c.
    std::vector<Eigen::MatrixXd> white(static_cast<std::size_t>(n));
    std::vector<Eigen::MatrixXd> bvals(static_cast<std::size_t>(n));  // atoms x basis
    for (int i = 0; i < n; ++i) {
        const auto& dict = basis[static_cast<std::size_t>(i)];
        const int mi = static_cast<int>(dict.size());
        const int si = static_cast<int>(cache.size(i));
        Eigen::MatrixXd vals(si, mi);
        for (int a = 0; a < si; ++a)
            for (int c = 0; c < mi; ++c)
                vals(a, c) = dict[static_cast<std::size_t>(c)](
                    cache.atom(i, static_cast<std::size_t>(a)));
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(mi, mi);
        for (int a = 0; a < si; ++a)
            gram += cache.prob(i, static_cast<std::size_t>(a)) *
                    (vals.row(a).transpose() * vals.row(a));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        Eigen::VectorXd inv_sqrt = es.eigenvalues();
        for (int c = 0; c < mi; ++c)
            inv_sqrt(c) = inv_sqrt(c) > 1e-12 ? 1.0 / std::sqrt(inv_sqrt(c)) : 0.0;
        white[static_cast<std::size_t>(i)] =
            es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
        bvals[static_cast<std::size_t>(i)] = std::move(vals);
    }

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const int mi = static_cast<int>(basis[static_cast<std::size_t>(i)].size());
            const int mj = static_cast<int>(basis[static_cast<std::size_t>(j)].size());
            Eigen::MatrixXd block = Eigen::MatrixXd::Zero(mi, mj);
            for (std::size_t a = 0; a < cache.size(i); ++a)
                for (std::size_t b = 0; b < cache.size(j); ++b) {
                    const double f =
                        kernel.evaluate(i, j, cache.atom(i, a), cache.atom(j, b));
                    const double p = cache.prob(i, a) * cache.prob(j, b);
                    block += (p * f) *
                             (bvals[static_cast<std::size_t>(i)]
                                  .row(static_cast<int>(a))
                                  .transpose() *
                              bvals[static_cast<std::size_t>(j)].row(static_cast<int>(b)));
                }
            m.block(offset[static_cast<std::size_t>(i)], offset[static_cast<std::size_t>(j)],
                    mi, mj) = white[static_cast<std::size_t>(i)] * block *
                              white[static_cast<std::size_t>(j)];
        }
    return largest_singular_value(m);
}

LambdaAlphaBetaResult lambda_alpha_beta(const KernelFamily& kernel,
                                        const std::vector<DistributionSpec>& laws,
                                        double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("lambda_alpha_beta: orders must be > 0");
    const AtomCache cache = AtomCache::build(laws, ExpectationMode::exact());
    const int n = cache.n();
    LambdaAlphaBetaResult res;
    for (int i = 0; i < n; ++i) {
        const std::size_t si = cache.size(i);
        std::vector<double> cond(si, 0.0);   // sum_{j != i} E[f^2 | Z_i = z_a]
        std::vector<double> envel(si, 0.0);  // F_i(z_a) = max_{j,b} |f|
        for (std::size_t a = 0; a < si; ++a)
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                for (std::size_t b = 0; b < cache.size(j); ++b) {
                    const double f =
                        kernel.evaluate(i, j, cache.atom(i, a), cache.atom(j, b));
                    cond[a] += cache.prob(j, b) * f * f;
                    envel[a] = std::max(envel[a], std::abs(f));
                }
            }
        const std::vector<double>& pi = cache.probs[static_cast<std::size_t>(i)];
        res.lambda_alpha =
            std::max(res.lambda_alpha,
                     std::sqrt(psi_norm(ScalarLaw::finite(cond, pi), 0.5 * alpha).value));
        res.k_f = std::max(res.k_f,
                           psi_norm(ScalarLaw::finite(envel, pi), alpha).value);
        double ratio = 0.0;
        for (std::size_t a = 0; a < si; ++a)
            if (envel[a] > 0.0) ratio = std::max(ratio, std::sqrt(cond[a]) / envel[a]);
        res.trivial_upper_alpha = std::max(res.trivial_upper_alpha, ratio);
    }
    res.trivial_upper_alpha *= res.k_f;

    for (int j = 0; j < n; ++j) {
        const std::size_t sj = cache.size(j);
        std::vector<double> cond(sj, 0.0);
        std::vector<double> envel(sj, 0.0);
        for (std::size_t b = 0; b < sj; ++b)
            for (int i = 0; i < n; ++i) {
                if (i == j) continue;
                for (std::size_t a = 0; a < cache.size(i); ++a) {
                    const double f =
                        kernel.evaluate(i, j, cache.atom(i, a), cache.atom(j, b));
                    cond[b] += cache.prob(i, a) * f * f;
                    envel[b] = std::max(envel[b], std::abs(f));
                }
            }
        const std::vector<double>& pj = cache.probs[static_cast<std::size_t>(j)];
        res.lambda_beta =
            std::max(res.lambda_beta,
                     std::sqrt(psi_norm(ScalarLaw::finite(cond, pj), 0.5 * beta).value));
        res.k_g = std::max(res.k_g,
                           psi_norm(ScalarLaw::finite(envel, pj), beta).value);
        double ratio = 0.0;
        for (std::size_t b = 0; b < sj; ++b)
            if (envel[b] > 0.0) ratio = std::max(ratio, std::sqrt(cond[b]) / envel[b]);
        res.trivial_upper_beta = std::max(res.trivial_upper_beta, ratio);
    }
    res.trivial_upper_beta *= res.k_g;
    return res;
}

namespace {

double conditional_second_moment(const KernelFamily::PointFn& fn, int index,
                                 const std::vector<double>& x,
                                 const ConditionalLaw& ylaw) {
    std::vector<double> z(x.begin(), x.end());
    z.push_back(0.0);
    if (ylaw.is_finite()) {
        double acc = 0.0;
        for (std::size_t b = 0; b < ylaw.atoms.size(); ++b) {
            z.back() = ylaw.atoms[b];
            const double v = fn(index, z);
            acc += ylaw.probs[b] * v * v;
        }
        return acc;
    }
    // Gaussian conditional: Gauss-Hermite style fixed quadrature is enough for
    // smooth integrands; reuse the psi-moment quadrature path instead.
    const double sd = ylaw.sd, mu = ylaw.mean;
    const auto integrand = [&](double t) {
        z.back() = mu + sd * t;
        const double v = fn(index, z);
        return v * v * std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    };
    // Simple composite Simpson over [-12, 12], 4096 panels: deterministic and
    // accurate to ~1e-12 for polynomially growing fn.
    const int panels = 4096;
    const double a = -12.0, b = 12.0, h = (b - a) / panels;
    double acc = integrand(a) + integrand(b);
    for (int k = 1; k < panels; ++k)
        acc += integrand(a + k * h) * ((k % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

ConditionalMoments conditional_moments(const KernelFamily& structured,
                                       const std::vector<DistributionSpec>& laws) {
    if (!structured.is_structured())
        throw std::invalid_argument("conditional moments: structured kernel required");
    const int n = static_cast<int>(laws.size());
    auto phi_tab = std::make_shared<std::vector<std::vector<double>>>(laws.size());
    auto psi_tab = std::make_shared<std::vector<std::vector<double>>>(laws.size());
    bool exact = true;
    for (int i = 0; i < n; ++i) {
        const auto& law = laws[static_cast<std::size_t>(i)];
        if (!law.is_product())
            throw std::invalid_argument("conditional moments: product-form laws required");
        const std::size_t na = law.x_marginal.size();
        (*phi_tab)[static_cast<std::size_t>(i)].resize(na);
        (*psi_tab)[static_cast<std::size_t>(i)].resize(na);
        for (std::size_t a = 0; a < na; ++a) {
            const auto& x = law.x_marginal.atoms[a];
            const auto& y = law.y_given_x[a];
            if (!y.is_finite()) exact = false;
            (*phi_tab)[static_cast<std::size_t>(i)][a] =
                std::sqrt(std::max(0.0, conditional_second_moment(structured.phi, i, x, y)));
            (*psi_tab)[static_cast<std::size_t>(i)][a] =
                std::sqrt(std::max(0.0, conditional_second_moment(structured.psi, i, x, y)));
        }
    }
    ConditionalMoments cm;
    cm.exact = exact;
    cm.sigma_phi = [phi_tab](int i, std::size_t a) {
        return (*phi_tab)[static_cast<std::size_t>(i)][a];
    };
    cm.sigma_psi = [psi_tab](int i, std::size_t a) {
        return (*psi_tab)[static_cast<std::size_t>(i)][a];
    };
    return cm;
}

LambdaProfile structured_lambdas(const KernelFamily& structured,
                                 const std::vector<DistributionSpec>& laws,
                                 double c_phi, double c_psi, double alpha,
                                 double beta) {
    if (!structured.is_structured())
        throw std::invalid_argument("structured_lambdas: structured kernel required");
    const int n = static_cast<int>(laws.size());
    if (n < 2) throw std::invalid_argument("structured_lambdas: need n >= 2");
    const ConditionalMoments cm = conditional_moments(structured, laws);
    const double ln = log_n(n);

    LambdaProfile prof;
    prof.set_orders(alpha, beta);
    prof.n = n;
    prof.c_phi = c_phi;
    prof.c_psi = c_psi;
    prof.b_w = structured.bw_bound;
    prof.lambda_2 = c_phi * c_psi * structured.bw_bound *
                    std::pow(ln, 1.0 / alpha + 1.0 / beta);

    // Shared x-grid: union of every index's X atoms.
    std::vector<std::vector<double>> grid;
    for (const auto& law : laws)
        for (const auto& x : law.x_marginal.atoms)
            if (std::find(grid.begin(), grid.end(), x) == grid.end()) grid.push_back(x);

    double sup_a = 0.0, sup_b = 0.0;
    for (const auto& x : grid) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const auto& lj = laws[static_cast<std::size_t>(j)];
                for (std::size_t b = 0; b < lj.x_marginal.size(); ++b) {
                    const double wv =
                        structured.w(i, j, x, lj.x_marginal.atoms[b]);
                    const double sig = cm.sigma_psi(j, b);
                    s += lj.x_marginal.probs[b] * wv * wv * sig * sig;
                }
            }
            sup_a = std::max(sup_a, std::sqrt(s));
        }
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                if (i == j) continue;
                const auto& li = laws[static_cast<std::size_t>(i)];
                for (std::size_t a = 0; a < li.x_marginal.size(); ++a) {
                    const double wv =
                        structured.w(i, j, li.x_marginal.atoms[a], x);
                    const double sig = cm.sigma_phi(i, a);
                    s += li.x_marginal.probs[a] * wv * wv * sig * sig;
                }
            }
            sup_b = std::max(sup_b, std::sqrt(s));
        }
    }
    prof.lambda_32_alpha = c_phi * std::pow(ln, 1.0 / alpha) * sup_a;
    prof.lambda_32_beta = c_psi * std::pow(ln, 1.0 / beta) * sup_b;
    prof.lambda_alpha_star =
        std::sqrt(ln) * prof.lambda_32_alpha + ln * prof.lambda_2;
    prof.lambda_beta_star =
        std::sqrt(ln) * prof.lambda_32_beta + ln * prof.lambda_2;

    // Sigma-weighted lambda_half.
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const auto& li = laws[static_cast<std::size_t>(i)];
            const auto& lj = laws[static_cast<std::size_t>(j)];
            for (std::size_t a = 0; a < li.x_marginal.size(); ++a)
                for (std::size_t b = 0; b < lj.x_marginal.size(); ++b) {
                    const double wv = structured.w(i, j, li.x_marginal.atoms[a],
                                                   lj.x_marginal.atoms[b]);
                    const double sp = cm.sigma_phi(i, a);
                    const double sq = cm.sigma_psi(j, b);
                    sum += li.x_marginal.probs[a] * lj.x_marginal.probs[b] * wv * wv *
                           sp * sp * sq * sq;
                }
        }
    prof.lambda_half = std::sqrt(sum);

    // Sigma-weighted operator norm: treat the X marginals as the laws of a
    // generic kernel sigma_phi(x) w(x,x') sigma_psi(x').
    std::vector<DistributionSpec> xlaws;
    xlaws.reserve(laws.size());
    for (const auto& law : laws) xlaws.push_back(DistributionSpec::finite_support(law.x_marginal));
    auto lookup = [&laws, &cm](bool phi, int idx, std::span<const double> x) {
        const auto& atoms = laws[static_cast<std::size_t>(idx)].x_marginal.atoms;
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            if (atoms[a].size() == x.size() &&
                std::equal(atoms[a].begin(), atoms[a].end(), x.begin()))
                return phi ? cm.sigma_phi(idx, a) : cm.sigma_psi(idx, a);
        }
        throw std::logic_error("structured_lambdas: x atom lookup failed");
    };
    KernelFamily weighted = KernelFamily::generic(
        [&structured, lookup](int i, int j, std::span<const double> x,
                              std::span<const double> xp) {
            return lookup(true, i, x) * structured.w(i, j, x, xp) * lookup(false, j, xp);
        });
    prof.lambda_one = operator_norm(weighted, xlaws).value;
    prof.notes.push_back("structured family: exact enumeration over X atoms");
    if (!cm.exact) prof.notes.push_back("sigma tables used quadrature for gaussian conditionals");
    return prof;
}

}  // namespace ustat
