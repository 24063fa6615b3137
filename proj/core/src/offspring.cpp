#include "looptree/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace looptree {

namespace {

constexpr std::uint64_t series_iteration_cap = 50'000'000;

std::string format_number(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double poisson_log_pmf(double mu, std::uint64_t k)
{
    const double kd = static_cast<double>(k);
    return kd * std::log(mu) - mu - std::lgamma(kd + 1.0);
}

// Sums pmf_base(k) * g(k) over the Poisson support of `mu`.
double poisson_series(double mu, double tail_tol, const std::function<double(std::uint64_t)>& g,
                      double growth_hint)
{
    double sum = 0.0;
    double mass = 0.0;
    std::uint64_t quiet = 0;
    const double start_checking = mu * std::max(1.0, growth_hint) + 1.0;
    for (std::uint64_t k = 0; k < series_iteration_cap; ++k) {
        const double p = std::exp(poisson_log_pmf(mu, k));
        const double term = p * g(k);
        sum += term;
        mass += p;
        if (static_cast<double>(k) > start_checking) {
            const bool tail_ok = (1.0 - mass) <= tail_tol;
            const bool term_ok = std::abs(term) <= 1e-18 * std::abs(sum);
            quiet = term_ok ? quiet + 1 : 0;
            if (tail_ok && quiet >= 4) return sum;
        }
    }
    std::ostringstream os;
    os << "moment_functional: series for poisson(" << format_number(mu)
       << ") did not converge within " << series_iteration_cap << " terms";
    throw std::runtime_error(os.str());
}

} // namespace

OffspringDistribution OffspringDistribution::deterministic(std::uint64_t d)
{
    OffspringDistribution out;
    out.kind_ = Kind::deterministic;
    out.degree_ = d;
    return out;
}

OffspringDistribution OffspringDistribution::poisson(double mu)
{
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("poisson offspring: mu must be finite and > 0, got " + format_number(mu));
    OffspringDistribution out;
    out.kind_ = Kind::poisson;
    out.mu_ = mu;
    return out;
}

OffspringDistribution OffspringDistribution::scaled(std::uint64_t lambda, const OffspringDistribution& base)
{
    if (lambda == 0) throw std::invalid_argument("scaled offspring: lambda must be >= 1");
    OffspringDistribution out;
    out.kind_ = Kind::scaled;
    out.lambda_ = lambda;
    out.tail_tolerance_ = base.tail_tolerance_;
    out.base_ = std::make_shared<const OffspringDistribution>(base);
    return out;
}

OffspringDistribution OffspringDistribution::empirical(std::map<std::uint64_t, double> pmf, double tail_tolerance)
{
    if (pmf.empty()) throw std::invalid_argument("empirical offspring: pmf table is empty");
    double total = 0.0;
    for (const auto& [k, p] : pmf) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("empirical offspring: negative or non-finite mass at k=" + std::to_string(k));
        total += p;
    }
    if (std::abs(total - 1.0) > tail_tolerance)
        throw std::invalid_argument("empirical offspring: masses sum to " + format_number(total) + ", not 1");

    OffspringDistribution out;
    out.kind_ = Kind::empirical;
    out.tail_tolerance_ = tail_tolerance;
    double running = 0.0;
    for (const auto& [k, p] : pmf) {
        if (p <= 0.0) continue;
        running += p;
        out.values_.push_back(k);
        out.cumulative_.push_back(running);
    }
    out.table_ = std::move(pmf);
    return out;
}

OffspringDistribution OffspringDistribution::with_tail_tolerance(double tol) const
{
    if (!(tol > 0.0) || tol >= 1.0) throw std::invalid_argument("tail_tolerance must lie in (0, 1)");
    OffspringDistribution out = *this;
    out.tail_tolerance_ = tol;
    if (base_) out.base_ = std::make_shared<const OffspringDistribution>(base_->with_tail_tolerance(tol));
    return out;
}

double OffspringDistribution::pmf(std::uint64_t k) const
{
    switch (kind_) {
    case Kind::deterministic:
        return k == degree_ ? 1.0 : 0.0;
    case Kind::poisson:
        return std::exp(poisson_log_pmf(mu_, k));
    case Kind::scaled:
        return k % lambda_ == 0 ? base_->pmf(k / lambda_) : 0.0;
    case Kind::empirical: {
        auto it = table_.find(k);
        return it == table_.end() ? 0.0 : it->second;
    }
    }
    return 0.0;
}

double OffspringDistribution::mean() const
{
    switch (kind_) {
    case Kind::deterministic:
        return static_cast<double>(degree_);
    case Kind::poisson:
        return mu_;
    case Kind::scaled:
        return static_cast<double>(lambda_) * base_->mean();
    case Kind::empirical: {
        double m = 0.0;
        for (const auto& [k, p] : table_) m += static_cast<double>(k) * p;
        return m;
    }
    }
    return 0.0;
}

std::optional<std::uint64_t> OffspringDistribution::max_support() const
{
    switch (kind_) {
    case Kind::deterministic:
        return degree_;
    case Kind::poisson:
        return std::nullopt;
    case Kind::scaled: {
        auto b = base_->max_support();
        if (!b) return std::nullopt;
        return *b * lambda_;
    }
    case Kind::empirical: {
        for (auto it = table_.rbegin(); it != table_.rend(); ++it)
            if (it->second > 0.0) return it->first;
        return 0;
    }
    }
    return std::nullopt;
}

std::vector<std::pair<std::uint64_t, double>> OffspringDistribution::finite_support() const
{
    switch (kind_) {
    case Kind::deterministic:
        return {{degree_, 1.0}};
    case Kind::poisson:
        throw std::logic_error("finite_support: poisson support is unbounded");
    case Kind::scaled: {
        auto inner = base_->finite_support();
        for (auto& [k, p] : inner) k *= lambda_;
        return inner;
    }
    case Kind::empirical:
        return {table_.begin(), table_.end()};
    }
    return {};
}

std::uint64_t OffspringDistribution::sample(RandomStream& rng) const
{
    switch (kind_) {
    case Kind::deterministic:
        return degree_;
    case Kind::poisson:
        return rng.poisson(mu_);
    case Kind::scaled:
        return lambda_ * base_->sample(rng);
    case Kind::empirical: {
        const double u = rng.uniform() * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return values_[static_cast<std::size_t>(it - cumulative_.begin())];
    }
    }
    return 0;
}

std::string OffspringDistribution::describe() const
{
    switch (kind_) {
    case Kind::deterministic:
        return "deterministic(" + std::to_string(degree_) + ")";
    case Kind::poisson:
        return "poisson(" + format_number(mu_) + ")";
    case Kind::scaled:
        return "scaled(" + std::to_string(lambda_) + "," + base_->describe() + ")";
    case Kind::empirical: {
        std::string s = "empirical(";
        bool first = true;
        for (const auto& [k, p] : table_) {
            if (!first) s += ",";
            s += std::to_string(k) + ":" + format_number(p);
            first = false;
        }
        return s + ")";
    }
    }
    return "?";
}

std::uint64_t OffspringDistribution::degree() const
{
    if (kind_ != Kind::deterministic) throw std::logic_error("degree(): not a deterministic distribution");
    return degree_;
}

double OffspringDistribution::mu() const
{
    if (kind_ != Kind::poisson) throw std::logic_error("mu(): not a poisson distribution");
    return mu_;
}

std::uint64_t OffspringDistribution::lambda() const
{
    if (kind_ != Kind::scaled) throw std::logic_error("lambda(): not a scaled distribution");
    return lambda_;
}

const OffspringDistribution& OffspringDistribution::base() const
{
    if (kind_ != Kind::scaled) throw std::logic_error("base(): not a scaled distribution");
    return *base_;
}

const std::map<std::uint64_t, double>& OffspringDistribution::table() const
{
    if (kind_ != Kind::empirical) throw std::logic_error("table(): not an empirical distribution");
    return table_;
}

MomentFunction MomentFunction::power(double s)
{
    MomentFunction f;
    f.form_ = Form::power;
    f.s_ = s;
    return f;
}

MomentFunction MomentFunction::derivative_power(double s)
{
    MomentFunction f;
    f.form_ = Form::derivative_power;
    f.s_ = s;
    return f;
}

MomentFunction MomentFunction::generic(std::function<double(std::uint64_t)> fn)
{
    if (!fn) throw std::invalid_argument("MomentFunction::generic: empty function");
    MomentFunction f;
    f.form_ = Form::generic;
    f.f_ = std::move(fn);
    return f;
}

double MomentFunction::operator()(std::uint64_t k) const
{
    const double kd = static_cast<double>(k);
    switch (form_) {
    case Form::power:
        return k == 0 ? 1.0 : std::pow(s_, kd);
    case Form::derivative_power:
        return k == 0 ? 0.0 : kd * std::pow(s_, kd - 1.0);
    case Form::generic:
        return f_(k);
    }
    return 0.0;
}

double moment_functional(const OffspringDistribution& dist, const MomentFunction& f, MomentMethod method)
{
    using Kind = OffspringDistribution::Kind;
    using Form = MomentFunction::Form;

    switch (dist.kind()) {
    case Kind::deterministic:
        return f(dist.degree());

    case Kind::empirical: {
        double sum = 0.0;
        for (const auto& [k, p] : dist.table())
            if (p > 0.0) sum += p * f(k);
        return sum;
    }

    case Kind::poisson: {
        const double mu = dist.mu();
        if (method == MomentMethod::automatic) {
            if (f.form() == Form::power) return std::exp(mu * (f.base() - 1.0));
            if (f.form() == Form::derivative_power) return mu * std::exp(mu * (f.base() - 1.0));
        }
        const double hint = f.form() == Form::generic ? 1.0 : std::abs(f.base());
        return poisson_series(mu, dist.tail_tolerance(), [&f](std::uint64_t k) { return f(k); }, hint);
    }

    case Kind::scaled: {
        const std::uint64_t lambda = dist.lambda();
        const double lam = static_cast<double>(lambda);
        const OffspringDistribution& base = dist.base();
        // E[f(lambda X)] rewritten as a moment of the base law.
        if (f.form() == Form::power)
            return moment_functional(base, MomentFunction::power(std::pow(f.base(), lam)), method);
        if (f.form() == Form::derivative_power) {
            const double s = f.base();
            const double factor = lam * std::pow(s, lam - 1.0);
            return factor * moment_functional(base, MomentFunction::derivative_power(std::pow(s, lam)), method);
        }
        return moment_functional(
            base, MomentFunction::generic([&f, lambda](std::uint64_t k) { return f(k * lambda); }), method);
    }
    }
    return 0.0;
}

double probability(const OffspringDistribution& dist, const std::function<bool(std::uint64_t)>& pred)
{
    return moment_functional(dist, MomentFunction::generic([&pred](std::uint64_t k) { return pred(k) ? 1.0 : 0.0; }));
}

} // namespace looptree
