#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rheat {

/// Family of m scalar reaction functions f_i with their derivatives.
/// The built-in family is f_k(x) = k (1-x) / (1+x^2), which is bounded with
/// bounded derivatives of every order.
struct Nonlinearity {
    struct Component {
        std::function<double(double)> f;
        std::function<double(double)> f_prime;
    };

    std::vector<Component> components;
    int smoothness_class = 3;
    std::string label;

    int size() const { return static_cast<int>(components.size()); }

    double eval(int i, double x) const { return components[static_cast<std::size_t>(i)].f(x); }
    double eval_prime(int i, double x) const { return components[static_cast<std::size_t>(i)].f_prime(x); }

    static Nonlinearity paper_family(double k) {
        Nonlinearity nl;
        nl.label = "rational(k=" + std::to_string(k) + ")";
        nl.components.push_back(Component{
            [k](double x) { return k * (1.0 - x) / (1.0 + x * x); },
            [k](double x) {
                const double d = 1.0 + x * x;
                return k * (x * x - 2.0 * x - 1.0) / (d * d);
            }});
        return nl;
    }

    static Nonlinearity zero(int m = 1) {
        Nonlinearity nl;
        nl.label = "zero";
        for (int i = 0; i < m; ++i)
            nl.components.push_back(Component{[](double) { return 0.0; }, [](double) { return 0.0; }});
        return nl;
    }

    static Nonlinearity constant(double c, int m = 1) {
        Nonlinearity nl;
        nl.label = "constant(" + std::to_string(c) + ")";
        for (int i = 0; i < m; ++i)
            nl.components.push_back(Component{[c](double) { return c; }, [](double) { return 0.0; }});
        return nl;
    }

    static Nonlinearity identity(int m = 1) {
        Nonlinearity nl;
        nl.label = "identity";
        for (int i = 0; i < m; ++i)
            nl.components.push_back(Component{[](double x) { return x; }, [](double) { return 1.0; }});
        return nl;
    }

    /// Copy with every derivative replaced by zero. Used to check that the
    /// second-order scheme collapses onto the first-order one.
    Nonlinearity with_zero_derivative() const {
        Nonlinearity nl = *this;
        nl.label += "+f'=0";
        for (auto& c : nl.components) c.f_prime = [](double) { return 0.0; };
        return nl;
    }
};

enum class NonlinKind { rational, constant, zero };

inline const char* to_string(NonlinKind k) {
    switch (k) {
        case NonlinKind::rational: return "rational";
        case NonlinKind::constant: return "constant";
        default: return "zero";
    }
}

/// Named families reachable from configuration files. "rational" is the
/// built-in f_k; "constant" uses the parameter as the constant value.
inline Nonlinearity make_nonlinearity(NonlinKind kind, double param, int m = 1) {
    switch (kind) {
        case NonlinKind::rational: {
            if (m != 1) throw std::invalid_argument("make_nonlinearity: rational family is one-component");
            return Nonlinearity::paper_family(param);
        }
        case NonlinKind::constant: return Nonlinearity::constant(param, m);
        default: return Nonlinearity::zero(m);
    }
}

}  // namespace rheat
