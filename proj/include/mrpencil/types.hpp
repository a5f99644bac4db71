#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrpencil {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Model-level failures: bad files, inconsistent dimensions, unknown names.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failures: singular Jacobians, Newton divergence, eigensolver trouble.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// State/algebraic counts and the fast/slow split sizes.
struct Dims {
    int n = 0;    // state count
    int m = 0;    // algebraic count
    int n_f = 0;  // fast states
    int n_s = 0;  // slow states
    int m_f = 0;  // fast algebraics
    int m_s = 0;  // slow algebraics

    void validate() const {
        if (n < 0 || m < 0 || n_f < 0 || n_s < 0 || m_f < 0 || m_s < 0)
            throw ModelError("Dims: negative size");
        if (n_f + n_s != n) throw ModelError("Dims: n_f + n_s != n");
        if (m_f + m_s != m) throw ModelError("Dims: m_f + m_s != m");
    }
};

enum class VarClass { Fast, Slow };

/// Fast/slow labels per variable plus the induced block permutation
/// (fast states, slow states, fast algebraics, slow algebraics).
struct Partition {
    std::vector<VarClass> state_class;
    std::vector<VarClass> alg_class;
    // Algebraic variables whose participation row is identically zero;
    // they are classified Slow and carry no dynamics.
    std::vector<int> zero_row_algs;

    int n() const { return static_cast<int>(state_class.size()); }
    int m() const { return static_cast<int>(alg_class.size()); }

    int n_fast() const { return count(state_class, VarClass::Fast); }
    int n_slow() const { return count(state_class, VarClass::Slow); }
    int m_fast() const { return count(alg_class, VarClass::Fast); }
    int m_slow() const { return count(alg_class, VarClass::Slow); }

    /// Original state indices in block order: fast first, then slow,
    /// each group in increasing original index.
    std::vector<int> state_order() const { return order(state_class); }
    std::vector<int> alg_order() const { return order(alg_class); }

    static Partition all_fast(int n, int m) {
        Partition p;
        p.state_class.assign(n, VarClass::Fast);
        p.alg_class.assign(m, VarClass::Fast);
        return p;
    }

    static Partition all_slow(int n, int m) {
        Partition p;
        p.state_class.assign(n, VarClass::Slow);
        p.alg_class.assign(m, VarClass::Slow);
        return p;
    }

private:
    static int count(const std::vector<VarClass>& v, VarClass c) {
        int k = 0;
        for (auto x : v)
            if (x == c) ++k;
        return k;
    }
    static std::vector<int> order(const std::vector<VarClass>& v) {
        std::vector<int> idx;
        idx.reserve(v.size());
        for (int i = 0; i < static_cast<int>(v.size()); ++i)
            if (v[i] == VarClass::Fast) idx.push_back(i);
        for (int i = 0; i < static_cast<int>(v.size()); ++i)
            if (v[i] == VarClass::Slow) idx.push_back(i);
        return idx;
    }
};

}  // namespace mrpencil
