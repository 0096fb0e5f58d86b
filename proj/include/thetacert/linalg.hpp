#pragma once

// Gaussian elimination over the coefficient tower with full pivoting on valuation.

#include <climits>
#include <string>
#include <vector>

#include "padic.hpp"

namespace thetacert {

using Matrix = std::vector<std::vector<Scalar>>;

struct EliminationStep {
    size_t row = 0;
    size_t col = 0;
    Valuation valuation;
};

struct EliminationResult {
    std::vector<EliminationStep> steps;
    bool complete = false;        // every entry outside pivot rows/columns vanishes mod p^k
    bool stalled = false;         // nonzero entries remain but none is a certified pivot
    i64 valuation_units = 0;      // sum of pivot valuations, in units of 1/e
    int e = 1;
    std::string note;

    size_t rank() const { return steps.size(); }
    Rational total_valuation() const { return Rational(valuation_units, e); }
};

namespace detail {

// x / (pi^v * unit) where the caller guarantees v(x) >= v.
inline Scalar divide_by_pivot(const Scalar& x, int v, const Scalar& unit_inv)
{
    return divide_uniformizer(x, v) * unit_inv;
}

} // namespace detail

// Eliminates until no nonzero entry remains or no entry of minimal valuation has a unit
// part. Full pivoting keeps every update exact modulo p^k.
inline EliminationResult eliminate(Matrix M, size_t max_steps = SIZE_MAX)
{
    EliminationResult res;
    const size_t rows = M.size();
    const size_t cols = rows ? M[0].size() : 0;
    if (rows == 0 || cols == 0) {
        res.complete = true;
        return res;
    }
    res.e = M[0][0].ctx()->e;
    std::vector<bool> row_used(rows, false), col_used(cols, false);
    std::vector<std::vector<Valuation>> val(rows, std::vector<Valuation>(cols));
    for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < cols; ++c) val[r][c] = valuation(M[r][c]);

    while (res.steps.size() < max_steps) {
        i64 best = LLONG_MAX;
        for (size_t r = 0; r < rows; ++r) {
            if (row_used[r]) continue;
            for (size_t c = 0; c < cols; ++c) {
                if (col_used[c] || val[r][c].capped) continue;
                best = std::min(best, val[r][c].units);
            }
        }
        if (best == LLONG_MAX) {
            res.complete = true;
            break;
        }
        // first entry of minimal valuation whose unit part is invertible
        size_t pr = rows, pc = cols;
        Scalar unit_inv;
        for (size_t r = 0; r < rows && pr == rows; ++r) {
            if (row_used[r]) continue;
            for (size_t c = 0; c < cols; ++c) {
                if (col_used[c] || val[r][c].capped || val[r][c].units != best) continue;
                Scalar part = divide_uniformizer(M[r][c], static_cast<int>(best));
                if (!is_unit(part)) continue;
                unit_inv = inverse(part);
                pr = r;
                pc = c;
                break;
            }
        }
        if (pr == rows) {
            res.stalled = true;
            res.note = "no entry of minimal valuation is a unit times a uniformizer power";
            break;
        }
        EliminationStep st;
        st.row = pr;
        st.col = pc;
        st.valuation = val[pr][pc];
        res.steps.push_back(st);
        res.valuation_units += best;
        row_used[pr] = true;
        col_used[pc] = true;
        for (size_t r = 0; r < rows; ++r) {
            if (row_used[r] || val[r][pc].capped) continue;
            Scalar f = detail::divide_by_pivot(M[r][pc], static_cast<int>(best), unit_inv);
            for (size_t c = 0; c < cols; ++c) {
                if (col_used[c] || val[pr][c].capped) continue;
                Scalar t = f * M[pr][c];
                M[r][c] -= t;
                val[r][c] = valuation(M[r][c]);
            }
            M[r][pc] = Scalar(M[r][pc].ctx());
            val[r][pc] = valuation(M[r][pc]);
        }
    }
    return res;
}

} // namespace thetacert
