#include "setobs/sdp.hpp"

#include "setobs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace setobs::sdp {
namespace {

constexpr double kArmijo = 0.25;
constexpr double kBacktrack = 0.5;
constexpr double kNewtonDecrementTol = 1e-11;
constexpr double kAcceptableGap = 1e-6;

// Log barrier over a set of affine LMI blocks and scalar inequalities
// a_k^T z + b_k > 0, with a linear objective t * c^T z.
class Barrier {
public:
    struct Linear {
        Index var;
        double sign;    // +1: z_var + offset > 0, -1: offset - z_var > 0
        double offset;
    };

    Barrier(std::vector<LmiBlock> blocks, std::vector<Linear> linear, Vector c)
        : blocks_(std::move(blocks)), linear_(std::move(linear)), c_(std::move(c)) {}

    Index dim() const { return c_.size(); }
    const Vector& c() const { return c_; }

    double nu() const {
        double nu = static_cast<double>(linear_.size());
        for (const auto& b : blocks_) {
            nu += static_cast<double>(b.size());
        }
        return nu;
    }

    // Barrier value only; +inf outside the domain.
    double value(const Vector& z, double t) const {
        double f = t * c_.dot(z);
        for (const auto& b : blocks_) {
            Eigen::LLT<Matrix> llt(b.evaluate(z));
            if (llt.info() != Eigen::Success) {
                return std::numeric_limits<double>::infinity();
            }
            const auto diag = llt.matrixLLT().diagonal();
            if ((diag.array() <= 0.0).any()) {
                return std::numeric_limits<double>::infinity();
            }
            f -= 2.0 * diag.array().log().sum();
        }
        for (const auto& lin : linear_) {
            const double slack = lin.sign * z(lin.var) + lin.offset;
            if (!(slack > 0.0)) {
                return std::numeric_limits<double>::infinity();
            }
            f -= std::log(slack);
        }
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    }

    // Gradient and Hessian; returns false outside the domain.
    bool derivatives(const Vector& z, double t, Vector& g, Matrix& H) const {
        const Index m = dim();
        g = t * c_;
        H = Matrix::Zero(m, m);
        for (const auto& b : blocks_) {
            Eigen::LLT<Matrix> llt(b.evaluate(z));
            if (llt.info() != Eigen::Success) {
                return false;
            }
            const Matrix Linv =
                llt.matrixL().solve(Matrix::Identity(b.size(), b.size()));
            std::vector<Matrix> scaled;
            scaled.reserve(b.terms.size());
            for (const auto& [var, Fj] : b.terms) {
                scaled.push_back(Linv * Fj * Linv.transpose());
                g(var) -= scaled.back().trace();
            }
            for (std::size_t a = 0; a < b.terms.size(); ++a) {
                for (std::size_t k = a; k < b.terms.size(); ++k) {
                    const double h = scaled[a].cwiseProduct(scaled[k]).sum();
                    H(b.terms[a].first, b.terms[k].first) += h;
                    if (k != a) {
                        H(b.terms[k].first, b.terms[a].first) += h;
                    }
                }
            }
        }
        for (const auto& lin : linear_) {
            const double slack = lin.sign * z(lin.var) + lin.offset;
            if (!(slack > 0.0)) {
                return false;
            }
            g(lin.var) -= lin.sign / slack;
            H(lin.var, lin.var) += 1.0 / (slack * slack);
        }
        return g.allFinite() && H.allFinite();
    }

    // Damped Newton centering. `stop` is checked after every accepted step.
    template <typename StopFn>
    Status center(Vector& z, double t, int max_steps, int& steps, StopFn&& stop) const {
        Vector g;
        Matrix H;
        for (int it = 0; it < max_steps; ++it) {
            if (!derivatives(z, t, g, H)) {
                return Status::numerical_failure;
            }
            Eigen::LDLT<Matrix> ldlt(H);
            if (ldlt.info() != Eigen::Success) {
                return Status::numerical_failure;
            }
            const Vector dz = ldlt.solve(-g);
            if (!dz.allFinite()) {
                return Status::numerical_failure;
            }
            const double decrement = -g.dot(dz);
            if (decrement / 2.0 <= kNewtonDecrementTol) {
                return Status::optimal;
            }
            const double f0 = value(z, t);
            double step = 1.0;
            Vector trial = z + dz;
            double f1 = value(trial, t);
            while (!(f1 <= f0 - kArmijo * step * decrement)) {
                step *= kBacktrack;
                if (step < 1e-14) {
                    // No measurable progress: treat as centred at working precision.
                    return Status::optimal;
                }
                trial = z + step * dz;
                f1 = value(trial, t);
            }
            z = trial;
            ++steps;
            if (stop(z)) {
                return Status::feasible;
            }
        }
        return Status::iteration_limit;
    }

private:
    std::vector<LmiBlock> blocks_;
    std::vector<Linear> linear_;
    Vector c_;
};

std::vector<Barrier::Linear> box_constraints(Index num_vars, double box) {
    std::vector<Barrier::Linear> out;
    for (Index j = 0; j < num_vars; ++j) {
        out.push_back({j, 1.0, box});
        out.push_back({j, -1.0, box});
    }
    return out;
}

struct PhaseOne {
    Status status;
    Vector x;
    double slack;
    int steps;
};

// minimize s  s.t.  F_b(x) + s I >= 0, |x_j| <= box.
PhaseOne phase_one(const Problem& problem, const Vector& x0, const Options& options) {
    const Index m = problem.num_vars;
    const Index s_index = m;

    Vector z(m + 1);
    z.head(m) = x0.cwiseMax(-0.5 * problem.box).cwiseMin(0.5 * problem.box);
    const double start_eig = min_block_eigenvalue(problem, z.head(m));
    if (start_eig > options.feasibility_tol) {
        return {Status::feasible, z.head(m), -start_eig, 0};
    }
    z(s_index) = 1.0 - start_eig;

    std::vector<LmiBlock> blocks = problem.blocks;
    for (auto& b : blocks) {
        b.terms.emplace_back(s_index, Matrix::Identity(b.size(), b.size()));
    }
    Vector c = Vector::Zero(m + 1);
    c(s_index) = 1.0;
    Barrier barrier(std::move(blocks), box_constraints(m, problem.box), c);

    const double nu = barrier.nu();
    auto strictly_feasible = [&](const Vector& zz) { return zz(s_index) < -options.feasibility_tol; };

    int steps = 0;
    double t = 1.0;
    for (int outer = 0; outer < options.max_outer_iterations; ++outer) {
        const Status st = barrier.center(z, t, options.max_newton_steps, steps, strictly_feasible);
        if (st == Status::feasible) {
            return {Status::feasible, z.head(m), z(s_index), steps};
        }
        if (st == Status::numerical_failure) {
            return {Status::numerical_failure, z.head(m), z(s_index), steps};
        }
        // The optimal slack is at least z_s - nu / t on the central path.
        if (z(s_index) - nu / t > -options.feasibility_tol) {
            return {Status::infeasible, z.head(m), z(s_index), steps};
        }
        t *= options.barrier_growth;
    }
    return {Status::iteration_limit, z.head(m), z(s_index), steps};
}

}  // namespace

Matrix LmiBlock::evaluate(const Vector& x) const {
    Matrix F = constant;
    for (const auto& [var, Fj] : terms) {
        F.noalias() += x(var) * Fj;
    }
    return 0.5 * (F + F.transpose());
}

std::string to_string(Status status) {
    switch (status) {
        case Status::optimal: return "optimal";
        case Status::feasible: return "feasible";
        case Status::infeasible: return "infeasible";
        case Status::iteration_limit: return "iteration_limit";
        case Status::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

double min_block_eigenvalue(const Problem& problem, const Vector& x) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : problem.blocks) {
        lo = std::min(lo, linalg::min_eigenvalue(b.evaluate(x)));
    }
    return lo;
}

Result find_feasible(const Problem& problem, const Vector& x0, const Options& options) {
    if (x0.size() != problem.num_vars) {
        throw StructuralError("initial point has the wrong number of variables");
    }
    const PhaseOne p1 = phase_one(problem, x0, options);
    Result r;
    r.status = p1.status;
    r.x = p1.x;
    r.phase1_slack = p1.slack;
    r.newton_steps = p1.steps;
    r.objective = problem.objective.size() == problem.num_vars ? problem.objective.dot(r.x) : 0.0;
    r.min_eigenvalue = min_block_eigenvalue(problem, r.x);
    return r;
}

Result minimize(const Problem& problem, const Vector& x0, const Options& options) {
    if (problem.objective.size() != problem.num_vars) {
        throw StructuralError("objective has the wrong number of variables");
    }
    Result r = find_feasible(problem, x0, options);
    if (r.status != Status::feasible) {
        return r;
    }

    Barrier barrier(problem.blocks, box_constraints(problem.num_vars, problem.box), problem.objective);
    const double nu = barrier.nu();
    Vector z = r.x;
    double t = 1.0;
    auto never = [](const Vector&) { return false; };
    double certified_gap = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < options.max_outer_iterations; ++outer) {
        Vector saved = z;
        const Status st = barrier.center(z, t, options.max_newton_steps, r.newton_steps, never);
        if (st == Status::numerical_failure) {
            // The last centred point is still strictly feasible; accept it
            // only if its gap is already small.
            z = saved;
            const double scale = std::max(1.0, std::abs(problem.objective.dot(z)));
            r.status = certified_gap <= kAcceptableGap * scale ? Status::optimal : Status::numerical_failure;
            break;
        }
        certified_gap = nu / t;
        const double obj = problem.objective.dot(z);
        if (certified_gap <= options.tolerance * std::max(1.0, std::abs(obj))) {
            r.status = Status::optimal;
            break;
        }
        r.status = Status::iteration_limit;
        t *= options.barrier_growth;
    }
    r.duality_gap = certified_gap;
    r.x = z;
    r.objective = problem.objective.dot(z);
    r.min_eigenvalue = min_block_eigenvalue(problem, z);
    return r;
}

}  // namespace setobs::sdp
