#include "ustat/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ustat {

void FiniteSupport::validate() const {
    if (atoms.size() != probs.size())
        throw std::invalid_argument("finite support: atoms/probs size mismatch");
    if (atoms.empty()) throw std::invalid_argument("finite support: empty");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw std::invalid_argument("finite support: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("finite support: probabilities do not sum to 1");
    const std::size_t d = atoms[0].size();
    for (const auto& a : atoms) {
        if (a.size() != d) throw std::invalid_argument("finite support: ragged atoms");
        for (double v : a)
            if (!std::isfinite(v)) throw std::invalid_argument("finite support: non-finite atom");
    }
}

ConditionalLaw ConditionalLaw::finite(std::vector<double> atoms, std::vector<double> probs) {
    ConditionalLaw law;
    law.kind = Kind::Finite;
    law.atoms = std::move(atoms);
    law.probs = std::move(probs);
    return law;
}

ConditionalLaw ConditionalLaw::gaussian(double mean, double sd) {
    ConditionalLaw law;
    law.kind = Kind::Gaussian;
    law.mean = mean;
    law.sd = sd;
    return law;
}

DistributionSpec DistributionSpec::finite_support(FiniteSupport s) {
    DistributionSpec d;
    d.kind = Kind::FiniteSupport;
    d.dimension = s.dim();
    d.finite = std::move(s);
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::finite_scalar(std::vector<double> atoms,
                                                 std::vector<double> probs) {
    FiniteSupport s;
    s.probs = std::move(probs);
    s.atoms.reserve(atoms.size());
    for (double a : atoms) s.atoms.push_back({a});
    return finite_support(std::move(s));
}

DistributionSpec DistributionSpec::gaussian(double mean, double sd, int dim) {
    DistributionSpec d;
    d.kind = Kind::Gaussian;
    d.dimension = dim;
    d.mean = mean;
    d.sd = sd;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::rademacher(int dim) {
    DistributionSpec d;
    d.kind = Kind::Rademacher;
    d.dimension = dim;
    return d;
}

DistributionSpec DistributionSpec::weibull_tail(double shape) {
    DistributionSpec d;
    d.kind = Kind::WeibullTail;
    d.dimension = 1;
    d.shape = shape;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::product_xy(FiniteSupport x, std::vector<ConditionalLaw> y) {
    DistributionSpec d;
    d.kind = Kind::ProductXY;
    d.x_marginal = std::move(x);
    d.y_given_x = std::move(y);
    d.dimension = d.x_marginal.dim() + 1;
    d.validate();
    return d;
}

DistributionSpec DistributionSpec::user_sampler(std::string id) {
    DistributionSpec d;
    d.kind = Kind::UserSampler;
    d.sampler_id = std::move(id);
    d.dimension = SamplerRegistry::get(d.sampler_id).first;
    return d;
}

int DistributionSpec::x_dim() const {
    if (kind != Kind::ProductXY) return 0;
    return x_marginal.dim();
}

void DistributionSpec::validate() const {
    if (dimension <= 0) throw std::invalid_argument("distribution: dimension must be positive");
    switch (kind) {
        case Kind::FiniteSupport:
            finite.validate();
            break;
        case Kind::Gaussian:
            if (!(sd > 0.0)) throw std::invalid_argument("gaussian: sd must be > 0");
            break;
        case Kind::WeibullTail:
            if (!(shape > 0.0)) throw std::invalid_argument("weibull-tail: shape must be > 0");
            break;
        case Kind::ProductXY: {
            x_marginal.validate();
            if (y_given_x.size() != x_marginal.size())
                throw std::invalid_argument("product-xy: one conditional law per x atom required");
            for (const auto& y : y_given_x) {
                if (y.kind == ConditionalLaw::Kind::Finite) {
                    if (y.atoms.size() != y.probs.size() || y.atoms.empty())
                        throw std::invalid_argument("product-xy: bad conditional support");
                    double s = 0.0;
                    for (double p : y.probs) {
                        if (!(p >= 0.0)) throw std::invalid_argument("product-xy: negative prob");
                        s += p;
                    }
                    if (std::abs(s - 1.0) > 1e-12)
                        throw std::invalid_argument("product-xy: conditional probs do not sum to 1");
                } else if (!(y.sd > 0.0)) {
                    throw std::invalid_argument("product-xy: conditional sd must be > 0");
                }
            }
            break;
        }
        case Kind::Rademacher:
        case Kind::UserSampler:
            break;
    }
}

bool DistributionSpec::has_finite_support() const {
    switch (kind) {
        case Kind::FiniteSupport:
        case Kind::Rademacher:
            return true;
        case Kind::ProductXY:
            return std::all_of(y_given_x.begin(), y_given_x.end(),
                               [](const ConditionalLaw& y) { return y.is_finite(); });
        default:
            return false;
    }
}

FiniteSupport DistributionSpec::support() const {
    switch (kind) {
        case Kind::FiniteSupport:
            return finite;
        case Kind::Rademacher: {
            FiniteSupport s;
            if (dimension != 1)
                throw std::invalid_argument("support: multivariate rademacher not enumerable here");
            s.atoms = {{-1.0}, {1.0}};
            s.probs = {0.5, 0.5};
            return s;
        }
        case Kind::ProductXY: {
            if (!has_finite_support())
                throw std::invalid_argument("support: continuous conditional law");
            FiniteSupport s;
            for (std::size_t a = 0; a < x_marginal.size(); ++a) {
                const auto& y = y_given_x[a];
                for (std::size_t b = 0; b < y.atoms.size(); ++b) {
                    std::vector<double> z = x_marginal.atoms[a];
                    z.push_back(y.atoms[b]);
                    s.atoms.push_back(std::move(z));
                    s.probs.push_back(x_marginal.probs[a] * y.probs[b]);
                }
            }
            return s;
        }
        default:
            throw std::invalid_argument("support: law is not finitely supported");
    }
}

void DistributionSpec::sample(rng::Stream& rs, std::span<double> out) const {
    if (static_cast<int>(out.size()) != dimension)
        throw std::invalid_argument("sample: output span has wrong dimension");
    switch (kind) {
        case Kind::FiniteSupport: {
            const std::size_t a = rs.categorical(finite.probs);
            std::copy(finite.atoms[a].begin(), finite.atoms[a].end(), out.begin());
            break;
        }
        case Kind::Gaussian:
            for (auto& v : out) v = mean + sd * rs.normal();
            break;
        case Kind::Rademacher:
            for (auto& v : out) v = rs.rademacher();
            break;
        case Kind::WeibullTail: {
            const double e = -std::log(rs.uniform_pos());
            out[0] = rs.rademacher() * std::pow(e, 1.0 / shape);
            break;
        }
        case Kind::ProductXY: {
            const std::size_t a = rs.categorical(x_marginal.probs);
            std::copy(x_marginal.atoms[a].begin(), x_marginal.atoms[a].end(), out.begin());
            const auto& y = y_given_x[a];
            double& yv = out[out.size() - 1];
            if (y.is_finite())
                yv = y.atoms[rs.categorical(y.probs)];
            else
                yv = y.mean + y.sd * rs.normal();
            break;
        }
        case Kind::UserSampler:
            SamplerRegistry::get(sampler_id).second(rs, out);
            break;
    }
}

void SampleBatch::validate() const {
    if (values.size() != static_cast<std::size_t>(n) * d)
        throw std::invalid_argument("batch: size mismatch");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("batch: non-finite entry");
}

SampleBatch sample_batch(const std::vector<DistributionSpec>& laws,
                         std::uint64_t seed, std::uint64_t replication,
                         std::uint64_t stream_tag) {
    if (laws.empty()) throw std::invalid_argument("sample_batch: no laws");
    const int d = laws[0].dimension;
    for (const auto& law : laws)
        if (law.dimension != d)
            throw std::invalid_argument("sample_batch: laws have mixed dimensions");
    SampleBatch b;
    b.n = static_cast<int>(laws.size());
    b.d = d;
    b.seed = seed;
    b.replication = replication;
    b.values.resize(static_cast<std::size_t>(b.n) * d);
    auto rs = rng::Stream::derive(seed, {stream_tag, replication});
    for (int i = 0; i < b.n; ++i) laws[i].sample(rs, b.row(i));
    b.validate();
    return b;
}

void write_batch_csv(const SampleBatch& batch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "index";
    for (int j = 0; j < batch.d; ++j) out << ",v" << (j + 1);
    out << "\r\n";
    out.precision(17);
    for (int i = 0; i < batch.n; ++i) {
        out << i;
        for (double v : batch.row(i)) out << ',' << v;
        out << "\r\n";
    }
}

SampleBatch read_batch_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
    SampleBatch b;
    std::vector<double> vals;
    int d = -1;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        bool first = true;
        while (std::getline(ss, cell, ',')) {
            if (first) {
                first = false;
                continue;  // index column
            }
            row.push_back(std::stod(cell));
        }
        if (d < 0) d = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != d)
            throw std::runtime_error("csv: ragged row in " + path);
        vals.insert(vals.end(), row.begin(), row.end());
    }
    if (d <= 0) throw std::runtime_error("csv: no data rows in " + path);
    b.d = d;
    b.n = static_cast<int>(vals.size()) / d;
    b.values = std::move(vals);
    b.validate();
    return b;
}

namespace {
std::map<std::string, std::pair<int, SamplerRegistry::Fn>>& sampler_map() {
    static std::map<std::string, std::pair<int, SamplerRegistry::Fn>> m;
    return m;
}
}  // namespace

void SamplerRegistry::add(const std::string& id, int dim, Fn fn) {
    sampler_map()[id] = {dim, std::move(fn)};
}

const std::pair<int, SamplerRegistry::Fn>& SamplerRegistry::get(const std::string& id) {
    auto it = sampler_map().find(id);
    if (it == sampler_map().end())
        throw std::invalid_argument("unknown user sampler: " + id);
    return it->second;
}

bool SamplerRegistry::contains(const std::string& id) {
    return sampler_map().count(id) != 0;
}

std::size_t joint_state_count(const std::vector<FiniteSupport>& sup) {
    std::size_t count = 1;
    for (const auto& s : sup) {
        if (s.size() == 0) throw std::invalid_argument("joint enumeration: empty support");
        if (count > kEnumerationCap / s.size())
            throw std::runtime_error("joint enumeration exceeds state cap");
        count *= s.size();
    }
    return count;
}

SampleBatch batch_from_atoms(const std::vector<FiniteSupport>& sup,
                             const std::vector<std::size_t>& idx) {
    SampleBatch b;
    b.n = static_cast<int>(sup.size());
    b.d = sup.empty() ? 0 : sup[0].dim();
    b.values.reserve(static_cast<std::size_t>(b.n) * b.d);
    for (std::size_t i = 0; i < sup.size(); ++i) {
        const auto& a = sup[i].atoms[idx[i]];
        b.values.insert(b.values.end(), a.begin(), a.end());
    }
    return b;
}

}  // namespace ustat
