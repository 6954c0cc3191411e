//! Dense complex eigenvalues through LAPACK `?geev`.

use std::ffi::c_char;
use std::sync::Once;

use lapack_sys::__BindgenComplex;
use num_complex::Complex;

mod sealed {
    pub trait Sealed {}
    impl Sealed for f32 {}
    impl Sealed for f64 {}
}

/// Scalars with a LAPACK complex eigensolver.
pub trait LapackScalar: sealed::Sealed + Sized + Copy {
    /// Eigenvalues of the column-major `n × n` matrix `a`, which is
    /// overwritten. `Err(info)` carries the LAPACK status on failure.
    fn geev(n: usize, a: &mut [Complex<Self>]) -> Result<Vec<Complex<Self>>, i32>;
}

extern "C" {
    fn openblas_set_num_threads(n: i32);
}

static SINGLE_THREADED: Once = Once::new();

// Thread-count-dependent blocking in OpenBLAS perturbs the last bits of the
// eigenvalues; pinning it keeps spectra bit-reproducible. Parallelism lives
// at the replicate level instead.
fn pin_blas_threads() {
    SINGLE_THREADED.call_once(|| unsafe { openblas_set_num_threads(1) });
}

macro_rules! impl_geev {
    ($t:ty, $f:ident) => {
        impl LapackScalar for $t {
            fn geev(n: usize, a: &mut [Complex<$t>]) -> Result<Vec<Complex<$t>>, i32> {
                assert_eq!(a.len(), n * n, "matrix buffer has wrong length");
                if n == 0 {
                    return Ok(Vec::new());
                }
                pin_blas_threads();
                let job = b'N' as c_char;
                let ni = n as i32;
                let mut w = vec![Complex::<$t>::new(0.0, 0.0); n];
                let mut rwork = vec![0.0 as $t; 2 * n];
                let mut dummy = [Complex::<$t>::new(0.0, 0.0); 1];
                let mut info = 0i32;
                let cast = |p: *mut Complex<$t>| p as *mut __BindgenComplex<$t>;

                let mut query = [Complex::<$t>::new(0.0, 0.0); 1];
                let lwork = -1i32;
                unsafe {
                    lapack_sys::$f(
                        &job,
                        &job,
                        &ni,
                        cast(a.as_mut_ptr()),
                        &ni,
                        cast(w.as_mut_ptr()),
                        cast(dummy.as_mut_ptr()),
                        &1,
                        cast(dummy.as_mut_ptr()),
                        &1,
                        cast(query.as_mut_ptr()),
                        &lwork,
                        rwork.as_mut_ptr(),
                        &mut info,
                    );
                }
                if info != 0 {
                    return Err(info);
                }
                let lwork = (query[0].re as usize).max(2 * n).max(1);
                let mut work = vec![Complex::<$t>::new(0.0, 0.0); lwork];
                let lwork = lwork as i32;
                unsafe {
                    lapack_sys::$f(
                        &job,
                        &job,
                        &ni,
                        cast(a.as_mut_ptr()),
                        &ni,
                        cast(w.as_mut_ptr()),
                        cast(dummy.as_mut_ptr()),
                        &1,
                        cast(dummy.as_mut_ptr()),
                        &1,
                        cast(work.as_mut_ptr()),
                        &lwork,
                        rwork.as_mut_ptr(),
                        &mut info,
                    );
                }
                if info != 0 {
                    return Err(info);
                }
                Ok(w)
            }
        }
    };
}

impl_geev!(f64, zgeev_);
impl_geev!(f32, cgeev_);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_matrix_eigenvalues_are_diagonal() {
        // column-major upper triangular
        let d = [Complex::new(1.0, 2.0), Complex::new(-3.0, 0.5), Complex::new(0.0, -1.0)];
        let mut a = vec![Complex::new(0.0, 0.0); 9];
        for i in 0..3 {
            a[i * 3 + i] = d[i];
            for r in 0..i {
                a[i * 3 + r] = Complex::new(0.7, -0.2);
            }
        }
        let mut w = f64::geev(3, &mut a).unwrap();
        w.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        let mut expect = d.to_vec();
        expect.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        for (x, y) in w.iter().zip(&expect) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn single_precision_rotation() {
        // [[0, -1], [1, 0]] has eigenvalues ±i
        let mut a = vec![
            Complex::new(0.0f32, 0.0),
            Complex::new(1.0, 0.0),
            Complex::new(-1.0, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let w = f32::geev(2, &mut a).unwrap();
        let mut ims: Vec<f32> = w.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-5 && (ims[1] - 1.0).abs() < 1e-5);
        assert!(w.iter().all(|z| z.re.abs() < 1e-5));
    }
}
