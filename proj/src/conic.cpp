#include "oid/conic.hpp"

#include <cmath>
#include <stdexcept>

namespace oid {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

double ScalarExpr::eval(const Eigen::MatrixXcd& v, const Eigen::VectorXd& vars) const {
    double out = constant;
    if (has_v()) out += (v_coeff.adjoint() * v).trace().real();
    for (const auto& t : terms) out += t.coeff * vars(t.var);
    return out;
}

Eigen::MatrixXd LmiBlock::eval(const Eigen::MatrixXcd& v,
                               const Eigen::VectorXd& vars) const {
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j <= i; ++j) {
            m(i, j) = at(i, j).eval(v, vars);
            m(j, i) = m(i, j);
        }
    return m;
}

LmiBlock& ConicProgram::new_lmi(int dim, const std::string& label) {
    LmiBlock blk;
    blk.dim = dim;
    blk.entries.resize(static_cast<size_t>(dim) * dim);
    blk.label = label;
    lmis.push_back(std::move(blk));
    return lmis.back();
}

int ConeLayout::psd_offset(int k) const {
    int off = nonneg;
    for (int i = 0; i < k; ++i) off += svec_dim(psd[i]);
    return off;
}

int ConeLayout::dim() const {
    int d = nonneg;
    for (int p : psd) d += svec_dim(p);
    return d;
}

int ConeLayout::degree() const {
    int d = nonneg;
    for (int p : psd) d += p;
    return d;
}

int svec_dim(int n) { return n * (n + 1) / 2; }

Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::VectorXd v(svec_dim(n));
    int k = 0;
    for (int j = 0; j < n; ++j) {
        v(k++) = m(j, j);
        for (int i = j + 1; i < n; ++i) v(k++) = kSqrt2 * m(i, j);
    }
    return v;
}

Eigen::MatrixXd smat(const Eigen::VectorXd& v) {
    // Invert n(n+1)/2 = len.
    const int len = static_cast<int>(v.size());
    const int n = static_cast<int>(std::round((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
    if (svec_dim(n) != len) throw std::invalid_argument("svec length is not triangular");
    Eigen::MatrixXd m(n, n);
    int k = 0;
    for (int j = 0; j < n; ++j) {
        m(j, j) = v(k++);
        for (int i = j + 1; i < n; ++i) {
            m(i, j) = v(k) / kSqrt2;
            m(j, i) = m(i, j);
            ++k;
        }
    }
    return m;
}

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = m.real();
    out.bottomRightCorner(n, n) = m.real();
    out.topRightCorner(n, n) = -m.imag();
    out.bottomLeftCorner(n, n) = m.imag();
    return out;
}

Eigen::MatrixXcd unembed_hermitian(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    Eigen::MatrixXd re = 0.5 * (m.topLeftCorner(n, n) + m.bottomRightCorner(n, n));
    Eigen::MatrixXd im = 0.5 * (m.bottomLeftCorner(n, n) - m.topRightCorner(n, n));
    Eigen::MatrixXcd out(n, n);
    out.real() = 0.5 * (re + re.transpose());
    out.imag() = 0.5 * (im - im.transpose());
    return out;
}

namespace {

/// Append the svec coefficients of 0.5 * Tr(embed(H) * Vhat) restricted to
/// the upper triangle ordering used by svec().
void add_v_coeffs(std::vector<Eigen::Triplet<double>>& trip, int row, int offset,
                  const Eigen::MatrixXcd& h) {
    const Eigen::MatrixXd hh = 0.5 * embed_hermitian(h);
    const int n = static_cast<int>(hh.rows());
    int k = 0;
    for (int j = 0; j < n; ++j) {
        if (hh(j, j) != 0.0) trip.emplace_back(row, offset + k, hh(j, j));
        ++k;
        for (int i = j + 1; i < n; ++i) {
            // svec coordinate is sqrt(2)*X_ij; Tr picks the entry twice.
            if (hh(i, j) != 0.0) trip.emplace_back(row, offset + k, kSqrt2 * hh(i, j));
            ++k;
        }
    }
}

}  // namespace

Lowering lower(const ConicProgram& program) {
    Lowering lo;
    lo.v_dim = program.v_dim;

    // Cone layout: scalar vars first, then slack coordinates appended as
    // constraints are scanned, then PSD blocks.
    ConeLayout& cones = lo.std_problem.cones;
    int next_nonneg = program.num_vars();
    lo.var_coord.resize(program.num_vars());
    for (int i = 0; i < program.num_vars(); ++i) lo.var_coord[i] = i;

    std::vector<int> ge_slack(program.constraints.size(), -1);
    for (size_t i = 0; i < program.constraints.size(); ++i)
        if (program.constraints[i].op == RelOp::Ge) ge_slack[i] = next_nonneg++;
    cones.nonneg = next_nonneg;

    int block = 0;
    if (program.v_dim > 0) {
        lo.v_block = block++;
        cones.psd.push_back(2 * program.v_dim);
    }
    lo.lmi_block.resize(program.lmis.size());
    for (size_t k = 0; k < program.lmis.size(); ++k) {
        lo.lmi_block[k] = block++;
        cones.psd.push_back(program.lmis[k].dim);
    }

    const int n = cones.dim();
    const int v_off = lo.v_block >= 0 ? cones.psd_offset(lo.v_block) : -1;

    // Count rows: one per scalar constraint, svec_dim per LMI.
    int m = static_cast<int>(program.constraints.size());
    for (const auto& lmi : program.lmis) m += svec_dim(lmi.dim);

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    int row = 0;

    lo.constraint_row.resize(program.constraints.size());
    for (size_t i = 0; i < program.constraints.size(); ++i) {
        const auto& con = program.constraints[i];
        lo.constraint_row[i] = row;
        if (con.expr.has_v()) add_v_coeffs(trip, row, v_off, con.expr.v_coeff);
        for (const auto& t : con.expr.terms)
            trip.emplace_back(row, lo.var_coord[t.var], t.coeff);
        if (con.op == RelOp::Ge) trip.emplace_back(row, ge_slack[i], -1.0);
        b(row) = -con.expr.constant;
        ++row;
    }

    for (size_t k = 0; k < program.lmis.size(); ++k) {
        const auto& lmi = program.lmis[k];
        const int off = cones.psd_offset(lo.lmi_block[k]);
        int coord = 0;
        for (int j = 0; j < lmi.dim; ++j) {
            for (int ii = j; ii < lmi.dim; ++ii) {
                // svec coordinate of S(ii,j) minus the affine entry value.
                const double scale = ii == j ? 1.0 : kSqrt2;
                const auto& e = lmi.at(ii, j);
                trip.emplace_back(row, off + coord, 1.0);
                if (e.has_v()) {
                    Eigen::MatrixXcd negated = -scale * e.v_coeff;
                    add_v_coeffs(trip, row, v_off, negated);
                }
                for (const auto& t : e.terms)
                    trip.emplace_back(row, lo.var_coord[t.var], -scale * t.coeff);
                b(row) = scale * e.constant;
                ++row;
                ++coord;
            }
        }
    }

    Eigen::SparseMatrix<double> a(m, n);
    a.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    {
        std::vector<Eigen::Triplet<double>> ctrip;
        if (program.objective.has_v())
            add_v_coeffs(ctrip, 0, v_off, program.objective.v_coeff);
        for (const auto& t : ctrip) c(t.col()) += t.value();
        for (const auto& t : program.objective.terms)
            c(lo.var_coord[t.var]) += t.coeff;
        lo.std_problem.obj_offset = program.objective.constant;
    }

    // Per-block column scaling: the embedded V carries eigenvalues of order
    // v_dim, which inflates roundoff in the complementarity products and
    // caps the reachable duality gap. Substituting V = 2 v_dim V' brings the
    // block to unit scale; scalar variables stay as they are.
    lo.psd_scale.assign(cones.psd.size(), 1.0);
    if (lo.v_block >= 0) {
        const double gamma = 2.0 * program.v_dim;
        lo.psd_scale[lo.v_block] = gamma;
        const int off = cones.psd_offset(lo.v_block);
        const int len = svec_dim(cones.psd[lo.v_block]);
        for (int col = off; col < off + len; ++col) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
                it.valueRef() *= gamma;
            c(col) *= gamma;
        }
    }

    // Row equilibration: divide each row of [A | b] by its max abs entry.
    // SparseMatrix is column-major; gather row maxima by iterating columns.
    lo.row_scale = b.cwiseAbs();
    for (int col = 0; col < a.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
            lo.row_scale(it.row()) = std::max(lo.row_scale(it.row()), std::abs(it.value()));
    for (int r = 0; r < m; ++r)
        if (lo.row_scale(r) == 0.0) lo.row_scale(r) = 1.0;
    for (int col = 0; col < a.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it)
            it.valueRef() /= lo.row_scale(it.row());
    b.array() /= lo.row_scale.array();

    lo.std_problem.A = std::move(a);
    lo.std_problem.b = std::move(b);
    lo.std_problem.c = std::move(c);
    return lo;
}

}  // namespace oid
