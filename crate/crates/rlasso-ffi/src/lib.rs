//! C ABI for the rlasso library: opaque handles, integer status codes and a
//! thread-local error message. The header is generated into
//! `include/rlasso.h` by the build script.

use rlasso::ensembles::{gaussian_matrix, lrbg_matrix, GraphSpec};
use rlasso::solver::{
    solve_bp, solve_bpdn, solve_clr, solve_rlasso, Solution, SolveStatus, SolverConfig,
};
use rlasso::{DenseMatrix, DenseVector, Error, NormExponent, RngSeed};
use std::cell::RefCell;
use std::os::raw::c_char;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlassoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
}

fn status_of(e: &Error) -> RlassoStatus {
    match e {
        Error::UnsupportedNorm(_)
        | Error::Dimension(_)
        | Error::Index(_)
        | Error::Domain(_)
        | Error::Config { .. }
        | Error::BudgetExceeded(_)
        | Error::Io(_) => RlassoStatus::InvalidArgument,
        _ => RlassoStatus::NumericalFailure,
    }
}

fn fail(e: Error) -> RlassoStatus {
    let code = status_of(&e);
    set_error(e.to_string());
    code
}

/// Opaque measurement matrix handle.
pub struct RlassoMatrix {
    inner: DenseMatrix,
}

/// Opaque solver result handle.
pub struct RlassoSolution {
    inner: Solution,
}

fn q_of(q: u32) -> Result<NormExponent, Error> {
    match q {
        1 => Ok(NormExponent::One),
        2 => Ok(NormExponent::Two),
        other => Err(Error::UnsupportedNorm(other.to_string())),
    }
}

/// Copies the message of the most recent error on this thread into `buf`
/// (NUL-terminated, truncated to `cap`). Returns the full message length.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null with cap 0.
#[no_mangle]
pub unsafe extern "C" fn rlasso_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds a matrix from `rows * cols` row-major entries.
///
/// # Safety
/// `entries` must point to `rows * cols` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rlasso_matrix_new(
    rows: usize,
    cols: usize,
    entries: *const f64,
    out: *mut *mut RlassoMatrix,
) -> RlassoStatus {
    if entries.is_null() || out.is_null() {
        set_error("null pointer");
        return RlassoStatus::NullPointer;
    }
    let data = std::slice::from_raw_parts(entries, rows.saturating_mul(cols)).to_vec();
    match DenseMatrix::new(rows, cols, data) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(RlassoMatrix { inner: m }));
            RlassoStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Draws a seeded M x N matrix with i.i.d. N(0, 1/M) entries.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rlasso_matrix_gaussian(
    m: usize,
    n: usize,
    seed: u64,
    out: *mut *mut RlassoMatrix,
) -> RlassoStatus {
    if out.is_null() {
        set_error("null pointer");
        return RlassoStatus::NullPointer;
    }
    match gaussian_matrix(m, n, RngSeed(seed)) {
        Ok(a) => {
            *out = Box::into_raw(Box::new(RlassoMatrix { inner: a }));
            RlassoStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Draws the seeded random-walk matrix of a D-left regular bipartite graph.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rlasso_matrix_lrbg(
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
    out: *mut *mut RlassoMatrix,
) -> RlassoStatus {
    if out.is_null() {
        set_error("null pointer");
        return RlassoStatus::NullPointer;
    }
    match lrbg_matrix(GraphSpec { m, n, d }, RngSeed(seed)) {
        Ok(a) => {
            *out = Box::into_raw(Box::new(RlassoMatrix { inner: a }));
            RlassoStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `matrix` must come from a `rlasso_matrix_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn rlasso_matrix_free(matrix: *mut RlassoMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

#[derive(Clone, Copy)]
enum Program {
    Rlasso { lambda: f64 },
    Bp,
    Bpdn { epsilon: f64 },
    Clr { tau_budget: f64 },
}

unsafe fn solve_common(
    matrix: *const RlassoMatrix,
    y: *const f64,
    y_len: usize,
    q: u32,
    tol: f64,
    max_iter: usize,
    program: Program,
    out: *mut *mut RlassoSolution,
) -> RlassoStatus {
    if matrix.is_null() || y.is_null() || out.is_null() {
        set_error("null pointer");
        return RlassoStatus::NullPointer;
    }
    let a = &(*matrix).inner;
    if y_len != a.rows() {
        return fail(Error::Dimension(format!(
            "y has {y_len} entries but the matrix has {} rows",
            a.rows()
        )));
    }
    let y = match DenseVector::new(std::slice::from_raw_parts(y, y_len).to_vec()) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let mut cfg = SolverConfig::default();
    if tol > 0.0 {
        cfg.tol = tol;
    }
    if max_iter > 0 {
        cfg.max_iter = max_iter;
    }
    let q = match q_of(q) {
        Ok(q) => q,
        Err(e) => return fail(e),
    };
    let result = match program {
        Program::Rlasso { lambda } => solve_rlasso(a, &y, lambda, q, &cfg),
        Program::Bp => solve_bp(a, &y, &cfg),
        Program::Bpdn { epsilon } => solve_bpdn(a, &y, epsilon, q, &cfg),
        Program::Clr { tau_budget } => solve_clr(a, &y, tau_budget, q, &cfg),
    };
    match result {
        Ok(sol) => {
            *out = Box::into_raw(Box::new(RlassoSolution { inner: sol }));
            RlassoStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Solves min ||z||_1 + lambda ||y - A z||_q. Pass tol <= 0 or max_iter = 0
/// for the solver defaults.
///
/// # Safety
/// `matrix` must be a live handle; `y` must hold `y_len` doubles; `out` must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solve(
    matrix: *const RlassoMatrix,
    y: *const f64,
    y_len: usize,
    lambda: f64,
    q: u32,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RlassoSolution,
) -> RlassoStatus {
    solve_common(matrix, y, y_len, q, tol, max_iter, Program::Rlasso { lambda }, out)
}

/// Solves min ||z||_1 subject to A z = y (basis pursuit).
///
/// # Safety
/// Same contract as `rlasso_solve`.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solve_bp(
    matrix: *const RlassoMatrix,
    y: *const f64,
    y_len: usize,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RlassoSolution,
) -> RlassoStatus {
    solve_common(matrix, y, y_len, 2, tol, max_iter, Program::Bp, out)
}

/// Solves min ||z||_1 subject to ||A z - y||_q <= epsilon.
///
/// # Safety
/// Same contract as `rlasso_solve`.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solve_bpdn(
    matrix: *const RlassoMatrix,
    y: *const f64,
    y_len: usize,
    epsilon: f64,
    q: u32,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RlassoSolution,
) -> RlassoStatus {
    solve_common(matrix, y, y_len, q, tol, max_iter, Program::Bpdn { epsilon }, out)
}

/// Solves min ||A z - y||_q subject to ||z||_1 <= tau_budget.
///
/// # Safety
/// Same contract as `rlasso_solve`.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solve_clr(
    matrix: *const RlassoMatrix,
    y: *const f64,
    y_len: usize,
    tau_budget: f64,
    q: u32,
    tol: f64,
    max_iter: usize,
    out: *mut *mut RlassoSolution,
) -> RlassoStatus {
    solve_common(
        matrix,
        y,
        y_len,
        q,
        tol,
        max_iter,
        Program::Clr { tau_budget },
        out,
    )
}

/// Length of the estimate held by a solution handle.
///
/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solution_len(solution: *const RlassoSolution) -> usize {
    if solution.is_null() {
        return 0;
    }
    (*solution).inner.x_hat.len()
}

/// Copies the estimate into `buf`, which must hold at least
/// `rlasso_solution_len` doubles.
///
/// # Safety
/// `solution` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solution_copy(
    solution: *const RlassoSolution,
    buf: *mut f64,
    cap: usize,
) -> RlassoStatus {
    if solution.is_null() || buf.is_null() {
        set_error("null pointer");
        return RlassoStatus::NullPointer;
    }
    let x = (*solution).inner.x_hat.as_slice();
    if cap < x.len() {
        return fail(Error::Dimension(format!(
            "buffer holds {cap} entries but the estimate has {}",
            x.len()
        )));
    }
    std::ptr::copy_nonoverlapping(x.as_ptr(), buf, x.len());
    RlassoStatus::Ok
}

/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solution_objective(solution: *const RlassoSolution) -> f64 {
    if solution.is_null() {
        return f64::NAN;
    }
    (*solution).inner.objective
}

/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solution_residual(solution: *const RlassoSolution) -> f64 {
    if solution.is_null() {
        return f64::NAN;
    }
    (*solution).inner.residual_norm
}

/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solution_iterations(solution: *const RlassoSolution) -> usize {
    if solution.is_null() {
        return 0;
    }
    (*solution).inner.iterations
}

/// 1 if the solver converged, 0 if it stopped at the iteration limit.
///
/// # Safety
/// `solution` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solution_converged(solution: *const RlassoSolution) -> i32 {
    if solution.is_null() {
        return 0;
    }
    match (*solution).inner.status {
        SolveStatus::Converged => 1,
        SolveStatus::IterLimit => 0,
    }
}

/// # Safety
/// `solution` must come from a solve call or be null.
#[no_mangle]
pub unsafe extern "C" fn rlasso_solution_free(solution: *mut RlassoSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Gordon's constant E_M.
#[no_mangle]
pub extern "C" fn rlasso_gordon_constant(m: usize) -> f64 {
    if m == 0 {
        return f64::NAN;
    }
    rlasso::tuning::gordon_constant(m)
}

/// The Gaussian-ensemble tuning rule; writes lambda and the robustness
/// constant tau on success.
///
/// # Safety
/// `lambda_out` and `tau_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rlasso_gaussian_lambda(
    m: usize,
    n: usize,
    s: usize,
    rho: f64,
    eta: f64,
    lambda_out: *mut f64,
    tau_out: *mut f64,
) -> RlassoStatus {
    if lambda_out.is_null() || tau_out.is_null() {
        set_error("null pointer");
        return RlassoStatus::NullPointer;
    }
    match rlasso::tuning::gaussian_lambda(m, n, s, rho, eta) {
        Ok(report) => {
            *lambda_out = report.lambda;
            *tau_out = report.tau.unwrap_or(f64::NAN);
            RlassoStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_roundtrip_through_the_abi() {
        unsafe {
            let mut matrix: *mut RlassoMatrix = std::ptr::null_mut();
            let entries = [1.0, 0.0, 0.0, 1.0];
            assert_eq!(
                rlasso_matrix_new(2, 2, entries.as_ptr(), &mut matrix),
                RlassoStatus::Ok
            );
            let y = [3.0, 0.0];
            let mut sol: *mut RlassoSolution = std::ptr::null_mut();
            assert_eq!(
                rlasso_solve(matrix, y.as_ptr(), 2, 2.0, 2, 0.0, 0, &mut sol),
                RlassoStatus::Ok
            );
            assert_eq!(rlasso_solution_len(sol), 2);
            let mut x = [0.0; 2];
            assert_eq!(
                rlasso_solution_copy(sol, x.as_mut_ptr(), 2),
                RlassoStatus::Ok
            );
            assert!((x[0] - 3.0).abs() < 1e-6 && x[1].abs() < 1e-6);
            assert_eq!(rlasso_solution_converged(sol), 1);
            rlasso_solution_free(sol);
            rlasso_matrix_free(matrix);
        }
    }

    #[test]
    fn errors_set_code_and_message() {
        unsafe {
            let mut matrix: *mut RlassoMatrix = std::ptr::null_mut();
            let entries = [f64::NAN];
            assert_eq!(
                rlasso_matrix_new(1, 1, entries.as_ptr(), &mut matrix),
                RlassoStatus::InvalidArgument
            );
            let mut buf = [0i8; 128];
            let len = rlasso_last_error_message(buf.as_mut_ptr(), buf.len());
            assert!(len > 0);

            assert_eq!(
                rlasso_matrix_gaussian(2, 2, 0, std::ptr::null_mut()),
                RlassoStatus::NullPointer
            );
        }
    }

    #[test]
    fn bad_norm_exponent_rejected() {
        unsafe {
            let mut matrix: *mut RlassoMatrix = std::ptr::null_mut();
            assert_eq!(
                rlasso_matrix_gaussian(2, 4, 7, &mut matrix),
                RlassoStatus::Ok
            );
            let y = [1.0, 2.0];
            let mut sol: *mut RlassoSolution = std::ptr::null_mut();
            assert_eq!(
                rlasso_solve(matrix, y.as_ptr(), 2, 1.0, 3, 0.0, 0, &mut sol),
                RlassoStatus::InvalidArgument
            );
            rlasso_matrix_free(matrix);
        }
    }
}
