#include "stars/problems.hpp"

#include <cmath>
#include <sstream>

#include "stars/errors.hpp"

namespace stars {

namespace {

constexpr int kDim = 100;

// --- SROSENBR: extended Rosenbrock, m = n -------------------------------
// r_{2i-1} = 10 (x_{2i} - x_{2i-1}^2), r_{2i} = 1 - x_{2i-1}.

void srosenbr_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int half = static_cast<int>(x.size()) / 2;
    for (int i = 0; i < half; ++i) {
        const double a = x[2 * i];
        const double b = x[2 * i + 1];
        r[2 * i] = 10.0 * (b - a * a);
        r[2 * i + 1] = 1.0 - a;
    }
}

Eigen::VectorXd srosenbr_gradient(const Eigen::VectorXd& x) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    const int half = static_cast<int>(x.size()) / 2;
    for (int i = 0; i < half; ++i) {
        const double a = x[2 * i];
        const double b = x[2 * i + 1];
        const double r1 = 10.0 * (b - a * a);
        const double r2 = 1.0 - a;
        g[2 * i] += 2.0 * r1 * (-20.0 * a) + 2.0 * r2 * (-1.0);
        g[2 * i + 1] += 2.0 * r1 * 10.0;
    }
    return g;
}

Eigen::VectorXd srosenbr_start(int n) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n / 2; ++i) {
        x[2 * i] = -1.2;
        x[2 * i + 1] = 1.0;
    }
    return x;
}

// --- BROYDN3D: Broyden tridiagonal, m = n -------------------------------
// r_i = (3 - 2 x_i) x_i - x_{i-1} - 2 x_{i+1} + 1 with x_0 = x_{n+1} = 0.

void broydn3d_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        const double left = i > 0 ? x[i - 1] : 0.0;
        const double right = i + 1 < n ? x[i + 1] : 0.0;
        r[i] = (3.0 - 2.0 * x[i]) * x[i] - left - 2.0 * right + 1.0;
    }
}

Eigen::VectorXd broydn3d_gradient(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd r(n);
    broydn3d_residuals(x, r);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        g[i] += 2.0 * r[i] * (3.0 - 4.0 * x[i]);
        if (i > 0) g[i - 1] += 2.0 * r[i] * (-1.0);
        if (i + 1 < n) g[i + 1] += 2.0 * r[i] * (-2.0);
    }
    return g;
}

// --- INTEGREQ: discrete integral equation, m = n -------------------------
// With h = 1/(n+1), t_j = j h, y_j = (x_j + t_j + 1)^3:
// r_i = x_i + h [ (1-t_i) sum_{j<=i} t_j y_j + t_i sum_{j>i} (1-t_j) y_j ] / 2.

void integreq_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int n = static_cast<int>(x.size());
    const double h = 1.0 / (n + 1.0);
    Eigen::VectorXd y(n), t(n);
    for (int j = 0; j < n; ++j) {
        t[j] = (j + 1.0) * h;
        const double u = x[j] + t[j] + 1.0;
        y[j] = u * u * u;
    }
    // prefix[i] = sum_{j<=i} t_j y_j, suffix[i] = sum_{j>i} (1-t_j) y_j
    double prefix = 0.0;
    Eigen::VectorXd suffix(n + 1);
    suffix[n] = 0.0;
    for (int j = n - 1; j >= 0; --j) suffix[j] = suffix[j + 1] + (1.0 - t[j]) * y[j];
    for (int i = 0; i < n; ++i) {
        prefix += t[i] * y[i];
        r[i] = x[i] + 0.5 * h * ((1.0 - t[i]) * prefix + t[i] * suffix[i + 1]);
    }
}

Eigen::VectorXd integreq_gradient(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    const double h = 1.0 / (n + 1.0);
    Eigen::VectorXd r(n);
    integreq_residuals(x, r);
    Eigen::VectorXd t(n), dy(n);
    for (int j = 0; j < n; ++j) {
        t[j] = (j + 1.0) * h;
        const double u = x[j] + t[j] + 1.0;
        dy[j] = 3.0 * u * u;
    }
    // J_ij = delta_ij + h/2 * [(1-t_i) t_j dy_j]_{j<=i} or [t_i (1-t_j) dy_j]_{j>i}
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    double a = 0.0; // running sum of r_i (1 - t_i) over i >= j ... built in reverse below
    // accumulate g_j = 2 [ r_j + h/2 ( t_j dy_j sum_{i>=j} r_i (1-t_i)
    //                               + (1-t_j) dy_j sum_{i<j} r_i t_i ) ]
    Eigen::VectorXd lower(n); // sum_{i<j} r_i t_i
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        lower[j] = acc;
        acc += r[j] * t[j];
    }
    for (int j = n - 1; j >= 0; --j) {
        a += r[j] * (1.0 - t[j]);
        g[j] = 2.0 * (r[j] + 0.5 * h * dy[j] * (t[j] * a + (1.0 - t[j]) * lower[j]));
    }
    return g;
}

Eigen::VectorXd integreq_start(int n) {
    Eigen::VectorXd x(n);
    const double h = 1.0 / (n + 1.0);
    for (int j = 0; j < n; ++j) {
        const double t = (j + 1.0) * h;
        x[j] = t * (t - 1.0);
    }
    return x;
}

// --- VARDIMNE: Vardim nonlinear equations, m = n + 2 ----------------------
// r_i = x_i - 1; r_{n+1} = K; r_{n+2} = K^2 with K = sum_j j (x_j - 1).

void vardimne_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int n = static_cast<int>(x.size());
    double k = 0.0;
    for (int j = 0; j < n; ++j) {
        r[j] = x[j] - 1.0;
        k += (j + 1.0) * (x[j] - 1.0);
    }
    r[n] = k;
    r[n + 1] = k * k;
}

Eigen::VectorXd vardimne_gradient(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    double k = 0.0;
    for (int j = 0; j < n; ++j) k += (j + 1.0) * (x[j] - 1.0);
    Eigen::VectorXd g(n);
    for (int j = 0; j < n; ++j)
        g[j] = 2.0 * (x[j] - 1.0) + 2.0 * k * (j + 1.0) + 4.0 * k * k * k * (j + 1.0);
    return g;
}

Eigen::VectorXd vardimne_start(int n) {
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = 1.0 - (j + 1.0) / n;
    return x;
}

// --- Penalty2: MGH penalty function II, m = 2n ---------------------------

constexpr double kPenaltyA = 1e-5;

void penalty2_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int n = static_cast<int>(x.size());
    const double sa = std::sqrt(kPenaltyA);
    r[0] = x[0] - 0.2;
    for (int i = 1; i < n; ++i) {
        const double yi = std::exp((i + 1.0) / 10.0) + std::exp(i / 10.0);
        r[i] = sa * (std::exp(x[i] / 10.0) + std::exp(x[i - 1] / 10.0) - yi);
    }
    const double e01 = std::exp(-0.1);
    for (int i = n; i < 2 * n - 1; ++i)
        r[i] = sa * (std::exp(x[i - n + 1] / 10.0) - e01);
    double q = 0.0;
    for (int j = 0; j < n; ++j) q += (n - j) * x[j] * x[j];
    r[2 * n - 1] = q - 1.0;
}

Eigen::VectorXd penalty2_gradient(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd r(2 * n);
    penalty2_residuals(x, r);
    const double sa = std::sqrt(kPenaltyA);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    g[0] += 2.0 * r[0];
    for (int i = 1; i < n; ++i) {
        g[i] += 2.0 * r[i] * sa * std::exp(x[i] / 10.0) / 10.0;
        g[i - 1] += 2.0 * r[i] * sa * std::exp(x[i - 1] / 10.0) / 10.0;
    }
    for (int i = n; i < 2 * n - 1; ++i) {
        const int j = i - n + 1;
        g[j] += 2.0 * r[i] * sa * std::exp(x[j] / 10.0) / 10.0;
    }
    for (int j = 0; j < n; ++j) g[j] += 2.0 * r[2 * n - 1] * 2.0 * (n - j) * x[j];
    return g;
}

// --- ARWHDNE: ARWHEAD nonlinear equations, m = 2(n-1) ---------------------
// r_i = x_i^2 + x_n^2 and r_{n-1+i} = -4 x_i + 3, i = 1..n-1.

void arwhdne_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int n = static_cast<int>(x.size());
    const double last_sq = x[n - 1] * x[n - 1];
    for (int i = 0; i < n - 1; ++i) {
        r[i] = x[i] * x[i] + last_sq;
        r[n - 1 + i] = -4.0 * x[i] + 3.0;
    }
}

Eigen::VectorXd arwhdne_gradient(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    const double last = x[n - 1];
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n - 1; ++i) {
        const double r1 = x[i] * x[i] + last * last;
        const double r2 = -4.0 * x[i] + 3.0;
        g[i] += 2.0 * r1 * 2.0 * x[i] + 2.0 * r2 * (-4.0);
        g[n - 1] += 2.0 * r1 * 2.0 * last;
    }
    return g;
}

// --- FREUROTH: extended Freudenstein-Roth, m = 2(n-1) ---------------------

void freuroth_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n - 1; ++i) {
        const double a = x[i];
        const double b = x[i + 1];
        r[2 * i] = a + b * ((5.0 - b) * b - 2.0) - 13.0;
        r[2 * i + 1] = a + b * ((b + 1.0) * b - 14.0) - 29.0;
    }
}

Eigen::VectorXd freuroth_gradient(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n - 1; ++i) {
        const double a = x[i];
        const double b = x[i + 1];
        const double r1 = a + b * ((5.0 - b) * b - 2.0) - 13.0;
        const double r2 = a + b * ((b + 1.0) * b - 14.0) - 29.0;
        g[i] += 2.0 * (r1 + r2);
        g[i + 1] += 2.0 * r1 * (10.0 * b - 3.0 * b * b - 2.0) +
                    2.0 * r2 * (3.0 * b * b + 2.0 * b - 14.0);
    }
    return g;
}

Eigen::VectorXd freuroth_start(int n) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    x[0] = 0.5;
    x[1] = -2.0;
    return x;
}

// --- CHEBYQAD: Chebyquad, m = n -------------------------------------------
// r_i = (1/n) sum_j T_i(x_j) - integral_0^1 T_i, with T_i the shifted
// Chebyshev polynomials on [0,1].

void chebyqad_residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const int n = static_cast<int>(x.size());
    const int m = n;
    r.setZero();
    for (int j = 0; j < n; ++j) {
        const double u = 2.0 * x[j] - 1.0;
        double t_prev = 1.0;
        double t_cur = u;
        for (int i = 0; i < m; ++i) {
            r[i] += t_cur;
            const double t_next = 2.0 * u * t_cur - t_prev;
            t_prev = t_cur;
            t_cur = t_next;
        }
    }
    for (int i = 0; i < m; ++i) {
        r[i] /= n;
        if (i % 2 == 1) r[i] += 1.0 / ((i + 1.0) * (i + 1.0) - 1.0); // even-degree T
    }
}

Eigen::VectorXd chebyqad_gradient(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    const int m = n;
    Eigen::VectorXd r(m);
    chebyqad_residuals(x, r);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
        const double u = 2.0 * x[j] - 1.0;
        double t_prev = 1.0, t_cur = u;
        double d_prev = 0.0, d_cur = 2.0;
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            acc += r[i] * d_cur;
            const double t_next = 2.0 * u * t_cur - t_prev;
            const double d_next = 2.0 * u * d_cur + 4.0 * t_cur - d_prev;
            t_prev = t_cur;
            t_cur = t_next;
            d_prev = d_cur;
            d_cur = d_next;
        }
        g[j] = 2.0 * acc / n;
    }
    return g;
}

Eigen::VectorXd chebyqad_start(int n) {
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) x[j] = (j + 1.0) / (n + 1.0);
    return x;
}

ProblemDef make_def(std::string name, int n, int m, double h_opt, Eigen::VectorXd start,
                    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residuals,
                    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient) {
    ProblemDef def;
    def.name = std::move(name);
    def.dim = n;
    def.residual_count = m;
    def.h_opt = h_opt;
    def.start = std::move(start);
    def.residuals = std::move(residuals);
    def.gradient = std::move(gradient);
    return def;
}

std::vector<ProblemDef> build_catalog() {
    std::vector<ProblemDef> defs;
    defs.push_back(make_def("SROSENBR", kDim, kDim, 4e-5, srosenbr_start(kDim),
                            srosenbr_residuals, srosenbr_gradient));
    defs.push_back(make_def("BROYDN3D", kDim, kDim, 4e-5,
                            Eigen::VectorXd::Constant(kDim, -1.0),
                            broydn3d_residuals, broydn3d_gradient));
    defs.push_back(make_def("INTEGREQ", kDim, kDim, 1e-5, integreq_start(kDim),
                            integreq_residuals, integreq_gradient));
    defs.push_back(make_def("VARDIMNE", kDim, kDim + 2, 1e-4, vardimne_start(kDim),
                            vardimne_residuals, vardimne_gradient));
    defs.push_back(make_def("Penalty2", kDim, 2 * kDim, 5e-5,
                            Eigen::VectorXd::Constant(kDim, 0.5),
                            penalty2_residuals, penalty2_gradient));
    defs.push_back(make_def("ARWHDNE", kDim, 2 * (kDim - 1), 1e-4,
                            Eigen::VectorXd::Ones(kDim),
                            arwhdne_residuals, arwhdne_gradient));
    defs.push_back(make_def("FREUROTH", kDim, 2 * (kDim - 1), 2e-4, freuroth_start(kDim),
                            freuroth_residuals, freuroth_gradient));
    defs.push_back(make_def("CHEBYQAD", kDim, kDim, 4e-6, chebyqad_start(kDim),
                            chebyqad_residuals, chebyqad_gradient));
    return defs;
}

} // namespace

double ProblemDef::objective(const Eigen::VectorXd& x) const {
    if (x.size() != dim) throw std::invalid_argument(name + ": dimension mismatch");
    Eigen::VectorXd r(residual_count);
    residuals(x, r);
    const double f = r.squaredNorm();
    if (!std::isfinite(f)) {
        std::ostringstream msg;
        msg << name << ": objective is non-finite at x = [" << x.transpose() << "]";
        throw EvaluationError(msg.str());
    }
    return f;
}

const std::vector<ProblemDef>& catalog() {
    static const std::vector<ProblemDef> defs = build_catalog();
    return defs;
}

const ProblemDef& find_problem(const std::string& name) {
    for (const auto& def : catalog())
        if (def.name == name) return def;
    std::string known;
    for (const auto& def : catalog()) known += (known.empty() ? "" : ", ") + def.name;
    throw ConfigError("unknown problem '" + name + "'; known problems: " + known);
}

NoisyProblem make_noisy(const ProblemDef& def, NoiseModel noise, RngStream noise_stream,
                        bool retain_raw) {
    NoisyProblem problem([&def](const Eigen::VectorXd& x) { return def.objective(x); },
                         def.dim, noise, noise_stream, retain_raw);
    problem.gradient = def.gradient;
    return problem;
}

} // namespace stars
