use av1lab::grain::GrainPlane;

pub fn lag1_autocorrelation(p: &GrainPlane) -> f64 {
    let n = p.samples.len() as f64;
    let mean = p.samples.iter().map(|&v| v as f64).sum::<f64>() / n;
    let var = p.samples.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>();
    let mut cov = 0.0;
    for y in 0..p.height {
        for x in 1..p.width {
            cov += (p.get(x, y) as f64 - mean) * (p.get(x - 1, y) as f64 - mean);
        }
    }
    cov / var * n / (p.height * (p.width - 1)) as f64
}
