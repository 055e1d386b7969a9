use nalgebra::Complex;

use crate::estimation::Precoder;
use crate::linalg::frob_sq;
use crate::CMatrix;

/// Euclidean projection onto `{W : ||W||_F^2 <= P}`: radial scaling when
/// outside, identity inside.
pub fn project_to_ball(w: CMatrix, power: f64) -> Precoder {
    let p = frob_sq(&w);
    if p <= power {
        return Precoder::from_matrix_unchecked(w);
    }
    let scale = (power / p).sqrt();
    Precoder::from_matrix_unchecked(w * Complex::new(scale, 0.0))
}
