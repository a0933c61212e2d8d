#include "ustat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ustat {

Kernel::Kernel(std::string name, std::size_t arity, std::size_t dimension, bool symmetric,
               bool weighted, Body body)
    : name_(std::move(name)),
      arity_(arity),
      dimension_(dimension),
      symmetric_(symmetric),
      weighted_(weighted),
      body_(std::make_shared<const Body>(std::move(body))) {
    if (arity_ == 0) throw std::invalid_argument("kernel arity must be positive");
    if (dimension_ == 0) throw std::invalid_argument("kernel dimension must be positive");
}

Point Kernel::evaluate(std::span<const double> x, const std::optional<IncreasingTuple>& index) const {
    if (x.size() != arity_) {
        throw std::invalid_argument("kernel '" + name_ + "': expected " + std::to_string(arity_) +
                                    " arguments, got " + std::to_string(x.size()));
    }
    std::span<const std::size_t> idx;
    if (weighted_) {
        if (!index) throw std::invalid_argument("kernel '" + name_ + "' is weighted: index tuple required");
        if (index->order() != arity_) throw std::invalid_argument("kernel '" + name_ + "': index tuple has wrong order");
        idx = index->indices();
    }
    Point out(dimension_, 0.0);
    evaluate_into(x, idx, out);
    return out;
}

namespace {

Kernel make_scalar(std::string name, std::size_t arity, bool symmetric,
                   std::function<double(std::span<const double>)> f) {
    return Kernel(std::move(name), arity, 1, symmetric, false,
                  [f = std::move(f)](std::span<const double> x, std::span<const std::size_t>,
                                     std::span<double> out) { out[0] = f(x); });
}

}  // namespace

std::vector<std::string> builtin_kernel_names() {
    return {"product", "sum", "centered-product", "covariance", "sign", "zero"};
}

Kernel builtin_kernel(const std::string& name, const BuiltinOptions& options) {
    const std::size_t m = options.arity;
    if (m == 0) throw std::invalid_argument("builtin kernel arity must be positive");
    if (name == "product") {
        return make_scalar(name, m, true, [](std::span<const double> x) {
            double p = 1.0;
            for (double v : x) p *= v;
            return p;
        });
    }
    if (name == "sum") {
        return make_scalar(name, m, true, [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v;
            return s;
        });
    }
    if (name == "centered-product") {
        const double mu = options.center;
        return make_scalar(name, m, true, [mu](std::span<const double> x) {
            double p = 1.0;
            for (double v : x) p *= (v - mu);
            return p;
        });
    }
    if (name == "covariance" || name == "sign") {
        if (m != 2) throw std::invalid_argument("builtin kernel '" + name + "' has arity 2");
        if (name == "covariance") {
            return make_scalar(name, 2, true, [](std::span<const double> x) {
                const double d = x[0] - x[1];
                return 0.5 * d * d;
            });
        }
        return make_scalar(name, 2, false, [](std::span<const double> x) {
            const double d = x[1] - x[0];
            return d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        });
    }
    if (name == "zero") {
        return make_scalar(name, m, true, [](std::span<const double>) { return 0.0; });
    }
    throw std::invalid_argument("unknown builtin kernel '" + name + "'");
}

Kernel expression_kernel(const std::vector<std::string>& expressions, std::size_t arity, bool symmetric) {
    if (expressions.empty()) throw std::invalid_argument("expression kernel needs at least one expression");
    std::vector<Expression> parsed;
    parsed.reserve(expressions.size());
    bool weighted = false;
    std::string label;
    for (const auto& text : expressions) {
        parsed.push_back(Expression::parse(text, arity));
        weighted = weighted || parsed.back().uses_indices();
        label += (label.empty() ? "" : "; ") + text;
    }
    auto shared = std::make_shared<const std::vector<Expression>>(std::move(parsed));
    const std::size_t dim = shared->size();
    return Kernel("expr:" + label, arity, dim, symmetric, weighted,
                  [shared](std::span<const double> x, std::span<const std::size_t> idx,
                           std::span<double> out) {
                      for (std::size_t k = 0; k < shared->size(); ++k) out[k] = (*shared)[k].evaluate(x, idx);
                  });
}

Kernel scaled(const Kernel& h, double c) {
    return Kernel(h.name() + "*" + std::to_string(c), h.arity(), h.dimension(), h.symmetric(), h.weighted(),
                  [h, c](std::span<const double> x, std::span<const std::size_t> idx, std::span<double> out) {
                      h.evaluate_into(x, idx, out);
                      for (double& v : out) v *= c;
                  });
}

Kernel linear_combination(double a, const Kernel& h1, double b, const Kernel& h2) {
    if (h1.arity() != h2.arity() || h1.dimension() != h2.dimension()) {
        throw std::invalid_argument("linear_combination: kernels must share arity and dimension");
    }
    const std::size_t dim = h1.dimension();
    return Kernel("lincomb", h1.arity(), dim, h1.symmetric() && h2.symmetric(),
                  h1.weighted() || h2.weighted(),
                  [a, b, h1, h2, dim](std::span<const double> x, std::span<const std::size_t> idx,
                                      std::span<double> out) {
                      std::vector<double> tmp(dim);
                      h1.evaluate_into(x, idx, out);
                      h2.evaluate_into(x, idx, tmp);
                      for (std::size_t k = 0; k < dim; ++k) out[k] = a * out[k] + b * tmp[k];
                  });
}

bool verify_symmetry(const Kernel& h, const Distribution& dist, std::size_t trials, const Stream& stream,
                     double tolerance) {
    const std::size_t m = h.arity();
    std::vector<double> x(m), y(m);
    std::vector<std::size_t> perm(m);
    std::vector<std::size_t> index(m);
    std::iota(index.begin(), index.end(), std::size_t{0});
    std::span<const std::size_t> idx = h.weighted() ? std::span<const std::size_t>(index)
                                                    : std::span<const std::size_t>();
    Point a(h.dimension()), b(h.dimension());
    std::uint64_t counter = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Stream s = stream.child(t);
        for (std::size_t k = 0; k < m; ++k) x[k] = dist.sample(s, k);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        // Fisher-Yates
        counter = m;
        for (std::size_t k = m; k > 1; --k) {
            const auto j = static_cast<std::size_t>(s.below(k, counter));
            std::swap(perm[k - 1], perm[j]);
        }
        for (std::size_t k = 0; k < m; ++k) y[k] = x[perm[k]];
        h.evaluate_into(x, idx, a);
        h.evaluate_into(y, idx, b);
        for (std::size_t k = 0; k < a.size(); ++k) {
            const double scale = std::max({1.0, std::fabs(a[k]), std::fabs(b[k])});
            if (!(std::fabs(a[k] - b[k]) <= tolerance * scale)) return false;
        }
    }
    return true;
}

}  // namespace ustat
