#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace oid {

/// Scalar decision variable handle. All scalar variables are nonnegative.
using VarId = int;

struct LinTerm {
    VarId var;
    double coeff;
};

/// Affine scalar expression: Tr(v_coeff * V) + sum coeff_i * var_i + constant.
/// v_coeff, when present, is a Hermitian matrix so the trace term is real.
struct ScalarExpr {
    Eigen::MatrixXcd v_coeff;  // empty when the expression does not touch V
    std::vector<LinTerm> terms;
    double constant = 0.0;

    ScalarExpr& add(VarId v, double c) {
        terms.push_back({v, c});
        return *this;
    }
    bool has_v() const { return v_coeff.size() > 0; }
    /// Evaluate at a Hermitian V and a scalar-variable assignment.
    double eval(const Eigen::MatrixXcd& v, const Eigen::VectorXd& vars) const;
};

enum class RelOp { Eq, Ge };  // expr == 0  or  expr >= 0

struct ScalarConstraint {
    ScalarExpr expr;
    RelOp op = RelOp::Eq;
    std::string label;
};

/// Symmetric affine matrix constrained positive semidefinite. Entry (i,j)
/// and (j,i) address the same stored expression.
struct LmiBlock {
    int dim = 0;
    std::vector<ScalarExpr> entries;
    std::string label;

    ScalarExpr& at(int i, int j) {
        return entries.at(std::max(i, j) * dim + std::min(i, j));
    }
    const ScalarExpr& at(int i, int j) const {
        return entries.at(std::max(i, j) * dim + std::min(i, j));
    }
    Eigen::MatrixXd eval(const Eigen::MatrixXcd& v, const Eigen::VectorXd& vars) const;
};

/// Conic program over one Hermitian PSD matrix variable V (dimension
/// v_dim, possibly zero) and nonnegative scalar variables.
struct ConicProgram {
    int v_dim = 0;
    std::vector<std::string> var_names;
    ScalarExpr objective;  // minimized
    std::vector<ScalarConstraint> constraints;
    std::vector<LmiBlock> lmis;

    VarId new_var(const std::string& name) {
        var_names.push_back(name);
        return static_cast<VarId>(var_names.size()) - 1;
    }
    int num_vars() const { return static_cast<int>(var_names.size()); }
    LmiBlock& new_lmi(int dim, const std::string& label);
};

/// Cone layout of the lowered problem: [nonneg | svec(psd_1) | ...].
struct ConeLayout {
    int nonneg = 0;
    std::vector<int> psd;

    int psd_offset(int k) const;
    int dim() const;
    /// Barrier degree: nonneg count plus the sum of PSD block orders.
    int degree() const;
};

/// Standard-form conic program: min c'x  s.t.  A x = b,  x in K.
struct StandardProblem {
    ConeLayout cones;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    double obj_offset = 0.0;
};

/// Bookkeeping from IR to standard form, used to map solutions and duals
/// back to IR-level objects.
struct Lowering {
    StandardProblem std_problem;
    int v_block = -1;          // psd block index of the embedded V (or -1)
    int v_dim = 0;             // complex dimension of V
    std::vector<int> var_coord;      // scalar var -> nonneg coordinate
    std::vector<int> constraint_row;  // IR constraint -> equality row
    std::vector<int> lmi_block;       // IR LMI -> psd block index
    Eigen::VectorXd row_scale;        // rows of A were divided by this
    std::vector<double> psd_scale;    // block coordinates substitute x = scale * x'
};

Lowering lower(const ConicProgram& program);

// --- symmetric vectorization -------------------------------------------

int svec_dim(int n);
Eigen::VectorXd svec(const Eigen::MatrixXd& m);
Eigen::MatrixXd smat(const Eigen::VectorXd& v);

/// Real symmetric embedding of a Hermitian matrix:
/// [Re(M), -Im(M); Im(M), Re(M)].
Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& m);
/// Inverse of embed_hermitian (averages the redundant blocks).
Eigen::MatrixXcd unembed_hermitian(const Eigen::MatrixXd& m);

}  // namespace oid
