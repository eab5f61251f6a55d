#ifndef FDIA_LINALG_HPP
#define FDIA_LINALG_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace fdia {

// Dense row-major matrix of doubles. Sized for this project's problems
// (at most a few hundred rows/columns), no view machinery.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::vector<double> matvec(const Matrix& a, std::span<const double> x);
std::vector<double> matvec_transposed(const Matrix& a, std::span<const double> x);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transposed(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2_squared(std::span<const double> a);

// Cholesky factorization of a symmetric positive definite matrix.
// Throws SemanticError when the matrix is not SPD (for reduced bus
// susceptance matrices that means a disconnected network).
class CholeskyFactor {
public:
    explicit CholeskyFactor(const Matrix& spd);
    std::vector<double> solve(std::span<const double> rhs) const;
    std::size_t dim() const { return l_.rows(); }

private:
    Matrix l_; // lower triangular
};

// Householder QR of a tall matrix (rows >= cols), used for least squares.
// Rank deficiency is detected from the diagonal of R.
class QrFactor {
public:
    explicit QrFactor(const Matrix& a);

    // minimizes ||a x - rhs||_2; rhs has a.rows() entries
    std::vector<double> solve_least_squares(std::span<const double> rhs) const;

    bool full_column_rank() const { return full_rank_; }
    std::size_t rank() const { return rank_; }

private:
    Matrix qr_;                  // Householder vectors below the diagonal, R on/above
    std::vector<double> beta_;   // reflector coefficients
    std::vector<double> v0_;     // leading reflector components
    std::size_t rank_ = 0;
    bool full_rank_ = false;
};

// Eigen decomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues in descending order with matching column eigenvectors.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors; // column j is the eigenvector for values[j]
};
SymmetricEigen symmetric_eigen(const Matrix& sym);

} // namespace fdia

#endif
