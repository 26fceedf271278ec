//! Minimal LAPACK binding: eigenvalues of a general complex matrix.
//!
//! Only `zgeev` (eigenvalues, no eigenvectors) is needed by the samplers, so
//! we bind it directly against the system OpenBLAS instead of pulling a full
//! linear-algebra stack.

use crate::{Complex64, Error, Result};

extern "C" {
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// Eigenvalues of a dense complex matrix given in column-major order.
///
/// The input buffer is overwritten (LAPACK works in place). `zgeev` balances
/// the matrix internally, which matters for the graded companion matrices
/// used by the polynomial root finder.
pub fn complex_eigenvalues(a: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    assert_eq!(a.len(), n * n, "matrix buffer must be n*n");
    if n == 0 {
        return Ok(Vec::new());
    }
    let ni = i32::try_from(n).map_err(|_| Error::numeric("matrix dimension exceeds i32"))?;
    let jobv = b'N';
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info: i32 = 0;

    // Workspace query, then the actual run.
    let mut work_query = [Complex64::new(0.0, 0.0)];
    let lwork_query: i32 = -1;
    unsafe {
        zgeev_(
            &jobv,
            &jobv,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work_query.as_mut_ptr(),
            &lwork_query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::numeric(format!("zgeev workspace query failed: info={info}")));
    }
    let lwork = work_query[0].re.max(1.0) as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zgeev_(
            &jobv,
            &jobv,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &1,
            std::ptr::null_mut(),
            &1,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::numeric(format!("zgeev failed to converge: info={info}")));
    }
    Ok(w)
}
