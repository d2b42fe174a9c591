#![allow(dead_code)]

use magbend_core::pipeline::GrayImage;

/// Rasterizes `y = f(x)` (mm) as a dark band of vertical half-thickness
/// `half_mm` on white, for x in `[0, x_max_mm]`.
pub fn rasterize_graph<F: Fn(f64) -> f64>(f: F, x_max_mm: f64, px_per_mm: f64, half_mm: f64) -> GrayImage {
    let margin = 20usize;
    let width = (x_max_mm * px_per_mm).round() as usize + 1;
    let ys: Vec<f64> = (0..width).map(|c| f(c as f64 / px_per_mm)).collect();
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min) - half_mm;
    let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max) + half_mm;
    let height = ((y_max - y_min) * px_per_mm).ceil() as usize + 2 * margin;
    let mut img = GrayImage::filled(width, height, 255, 1.0 / px_per_mm).unwrap();
    for (c, &y) in ys.iter().enumerate() {
        for r in 0..height {
            // row 0 is the top of the image
            let y_px = (height - 1 - r) as f64 / px_per_mm + y_min - margin as f64 / px_per_mm;
            if (y_px - y).abs() <= half_mm {
                img.set(c, r, 0);
            }
        }
    }
    img
}

/// Piecewise-linear interpolation of a polyline that is a graph over x.
pub fn interpolate(points_mm: &[[f64; 2]], x: f64) -> f64 {
    let i = points_mm.partition_point(|p| p[0] < x).clamp(1, points_mm.len() - 1);
    let (a, b) = (points_mm[i - 1], points_mm[i]);
    let t = if b[0] > a[0] { (x - a[0]) / (b[0] - a[0]) } else { 0.0 };
    a[1] + t * (b[1] - a[1])
}
