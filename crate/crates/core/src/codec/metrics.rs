//! Peak signal-to-noise ratio.

use crate::error::{Error, Result};
use crate::frame::{Frame, Plane};

/// PSNR of one comparison. Identical inputs have no finite value.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum Psnr {
    Lossless,
    Db(f64),
}

impl Psnr {
    fn from_mse(mse: f64, max: f64) -> Self {
        if mse == 0.0 {
            Psnr::Lossless
        } else {
            Psnr::Db(10.0 * (max * max / mse).log10())
        }
    }

    /// Decibels, with lossless reported as infinity.
    pub fn db(self) -> f64 {
        match self {
            Psnr::Lossless => f64::INFINITY,
            Psnr::Db(d) => d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FramePsnr {
    /// One entry per plane present.
    pub planes: Vec<Psnr>,
    /// Over all samples of all planes pooled together.
    pub combined: Psnr,
}

fn sse(a: &Plane, b: &Plane) -> Result<u64> {
    if (a.width, a.height, a.bit_depth) != (b.width, b.height, b.bit_depth) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}@{} against {}x{}@{}",
            a.width, a.height, a.bit_depth, b.width, b.height, b.bit_depth
        )));
    }
    Ok(a.data().iter().zip(b.data()).map(|(&x, &y)| (x as i64 - y as i64).pow(2) as u64).sum())
}

pub fn plane_psnr(a: &Plane, b: &Plane) -> Result<Psnr> {
    let e = sse(a, b)?;
    Ok(Psnr::from_mse(e as f64 / a.data().len() as f64, a.max_value() as f64))
}

pub fn psnr(a: &Frame, b: &Frame) -> Result<FramePsnr> {
    let (pa, pb) = (a.planes(), b.planes());
    if pa.len() != pb.len() {
        return Err(Error::DimensionMismatch("plane counts differ".into()));
    }
    let mut planes = Vec::new();
    let (mut total, mut count) = (0u64, 0usize);
    for (x, y) in pa.iter().zip(&pb) {
        let e = sse(x, y)?;
        planes.push(Psnr::from_mse(e as f64 / x.data().len() as f64, x.max_value() as f64));
        total += e;
        count += x.data().len();
    }
    let combined = Psnr::from_mse(total as f64 / count as f64, a.y.max_value() as f64);
    Ok(FramePsnr { planes, combined })
}
