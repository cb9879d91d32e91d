//! Bilinear resize with corner-aligned sampling: each destination pixel is
//! the weighted average of the four nearest source pixels.

use htq::ImagePlane;

pub fn bilinear(src: &ImagePlane, width: usize, height: usize) -> ImagePlane {
    let sx = if width > 1 {
        (src.width() - 1) as f64 / (width - 1) as f64
    } else {
        0.0
    };
    let sy = if height > 1 {
        (src.height() - 1) as f64 / (height - 1) as f64
    } else {
        0.0
    };
    ImagePlane::from_fn(width, height, |x, y| {
        let fx = x as f64 * sx;
        let fy = y as f64 * sy;
        let x0 = fx as usize;
        let y0 = fy as usize;
        let x1 = (x0 + 1).min(src.width() - 1);
        let y1 = (y0 + 1).min(src.height() - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        let top = src.get(x0, y0) * (1.0 - tx) + src.get(x1, y0) * tx;
        let bot = src.get(x0, y1) * (1.0 - tx) + src.get(x1, y1) * tx;
        top * (1.0 - ty) + bot * ty
    })
}
