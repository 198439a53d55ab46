#ifndef SPECFIT_LINALG_HPP
#define SPECFIT_LINALG_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace specfit {

using Vector = std::vector<double>;

// Small dense row-major matrix. Everything in this project is q x q with
// q <= 6, so no effort is spent on blocking or expression templates.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix transposed() const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix operator+(const Matrix& rhs) const;
    Matrix operator-(const Matrix& rhs) const;
    Matrix scaled(double c) const;
    Vector operator*(const Vector& v) const;

    double max_abs() const;
    double max_asymmetry() const;
    void symmetrize();

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Solves A x = b by LU with partial pivoting. Throws on (numerically)
// singular A.
Vector solve(Matrix a, Vector b);

Matrix inverse(const Matrix& a);

// Eigenvalues (ascending) of a symmetric matrix via cyclic Jacobi rotations.
Vector symmetric_eigenvalues(Matrix a);

// Largest/smallest eigenvalue ratio of a symmetric positive definite matrix;
// infinity when the smallest eigenvalue is <= 0.
double symmetric_condition(const Matrix& a);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

}  // namespace specfit

#endif
