#pragma once

#include "csvm/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace csvm {

struct KernelSpec {
    enum class Kind : std::uint8_t { Linear, Gaussian, Polynomial };

    Kind kind = Kind::Linear;
    double rho = 1.0;   // Gaussian width
    int degree = 1;     // polynomial degree

    static KernelSpec linear() { return {}; }

    static KernelSpec gaussian(double rho) {
        if (!(rho > 0.0) || !std::isfinite(rho)) {
            throw std::invalid_argument("gaussian kernel: rho must be > 0");
        }
        return {Kind::Gaussian, rho, 1};
    }

    /// (1 + x'y)^degree
    static KernelSpec polynomial(int degree) {
        if (degree < 1 || degree > 10) {
            throw std::invalid_argument("polynomial kernel: degree must be in 1..10");
        }
        return {Kind::Polynomial, 1.0, degree};
    }

    friend bool operator==(const KernelSpec& a, const KernelSpec& b) {
        if (a.kind != b.kind) {
            return false;
        }
        switch (a.kind) {
        case Kind::Linear: return true;
        case Kind::Gaussian: return a.rho == b.rho;
        case Kind::Polynomial: return a.degree == b.degree;
        }
        return false;
    }
};

/// "linear", "gaussian:<rho>", "polynomial:<degree>"
inline std::string to_string(const KernelSpec& k) {
    std::ostringstream os;
    os.precision(17);
    switch (k.kind) {
    case KernelSpec::Kind::Linear: os << "linear"; break;
    case KernelSpec::Kind::Gaussian: os << "gaussian:" << k.rho; break;
    case KernelSpec::Kind::Polynomial: os << "polynomial:" << k.degree; break;
    }
    return os.str();
}

inline KernelSpec parse_kernel(const std::string& text) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (name == "linear" && arg.empty()) {
            return KernelSpec::linear();
        }
        if (name == "gaussian" && !arg.empty()) {
            return KernelSpec::gaussian(std::stod(arg));
        }
        if (name == "polynomial" && !arg.empty()) {
            std::size_t used = 0;
            const int d = std::stoi(arg, &used);
            if (used == arg.size()) {
                return KernelSpec::polynomial(d);
            }
        }
    } catch (const std::logic_error&) {
    }
    throw std::invalid_argument("unrecognised kernel '" + text + "'");
}

template <class A, class B>
double kernel_eval(const KernelSpec& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("kernel_eval: dimension mismatch");
    }
    const auto xv = x.reshaped();
    const auto yv = y.reshaped();
    switch (spec.kind) {
    case KernelSpec::Kind::Linear: return xv.dot(yv);
    case KernelSpec::Kind::Gaussian:
        return std::exp(-(xv - yv).squaredNorm() / (spec.rho * spec.rho));
    case KernelSpec::Kind::Polynomial: {
        const double base = 1.0 + xv.dot(yv);
        double out = 1.0;
        for (int d = 0; d < spec.degree; ++d) {
            out *= base;
        }
        return out;
    }
    }
    return 0.0;
}

/// Symmetric n x n Gram matrix, entries computed pairwise.
inline Matrix gram_matrix(const KernelSpec& spec, const Matrix& x) {
    if (!x.allFinite()) {
        throw std::invalid_argument("gram_matrix: non-finite input");
    }
    const Eigen::Index n = x.rows();
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            g(i, j) = kernel_eval(spec, x.row(i), x.row(j));
            g(j, i) = g(i, j);
        }
    }
    return g;
}

/// K(a_i, b_j) for every row pair; a is m x p, b is n x p. Uses matrix
/// products, so Gaussian entries carry rounding of order 1e-15.
inline Matrix cross_kernel(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("cross_kernel: dimension mismatch");
    }
    Matrix inner = a * b.transpose();
    switch (spec.kind) {
    case KernelSpec::Kind::Linear: return inner;
    case KernelSpec::Kind::Gaussian: {
        const Vector na = a.rowwise().squaredNorm();
        const Vector nb = b.rowwise().squaredNorm();
        const double inv = 1.0 / (spec.rho * spec.rho);
        for (Eigen::Index j = 0; j < inner.cols(); ++j) {
            for (Eigen::Index i = 0; i < inner.rows(); ++i) {
                const double d2 = std::max(0.0, na(i) + nb(j) - 2.0 * inner(i, j));
                inner(i, j) = std::exp(-d2 * inv);
            }
        }
        return inner;
    }
    case KernelSpec::Kind::Polynomial: {
        const int deg = spec.degree;
        return inner.unaryExpr([deg](double v) {
            double out = 1.0;
            for (int d = 0; d < deg; ++d) {
                out *= 1.0 + v;
            }
            return out;
        });
    }
    }
    return inner;
}

} // namespace csvm
