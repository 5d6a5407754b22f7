use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::center::{find_center, find_periodic_center};
use super::cycle::DEFAULT_MAX_ITER;
use super::free::{classify_free_critical, Classification, ClassificationTag, Evidence};
use super::ClassifyError;
use crate::maps::family_member;

/// Axis-aligned parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Window {
    pub fn new(re: [f64; 2], im: [f64; 2]) -> Result<Self, ClassifyError> {
        let ok = |r: [f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] < r[1];
        if !ok(re) || !ok(im) {
            return Err(ClassifyError::InvalidArgument(format!("empty or non-finite window {re:?} x {im:?}")));
        }
        Ok(Self { re, im })
    }

    /// Cell sizes `(dx, dy)` for a square grid of `resolution` cells per side.
    pub fn cell_size(&self, resolution: usize) -> (f64, f64) {
        let n = resolution as f64;
        ((self.re[1] - self.re[0]) / n, (self.im[1] - self.im[0]) / n)
    }

    /// Center of cell `(col, row)`; row 0 is the top edge.
    pub fn cell_center(&self, resolution: usize, col: usize, row: usize) -> Complex64 {
        let (dx, dy) = self.cell_size(resolution);
        Complex64::new(self.re[0] + (col as f64 + 0.5) * dx, self.im[1] - (row as f64 + 0.5) * dy)
    }

    /// Cell containing `p`, if inside the window.
    pub fn cell_of(&self, resolution: usize, p: Complex64) -> Option<(usize, usize)> {
        let (dx, dy) = self.cell_size(resolution);
        let col = ((p.re - self.re[0]) / dx).floor();
        let row = ((self.im[1] - p.im) / dy).floor();
        let n = resolution as f64;
        (col >= 0.0 && col < n && row >= 0.0 && row < n).then_some((col as usize, row as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Cells per side.
    pub resolution: usize,
    /// Sphere-grid resolution for the immediate-basin test.
    pub basin_resolution: usize,
    pub max_iter: usize,
    /// Promote a cell to PERIODIC_CRITICAL when Newton finds a center inside it.
    pub snap_centers: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { resolution: 128, basin_resolution: 128, max_iter: DEFAULT_MAX_ITER, snap_centers: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub index: usize,
    pub col: usize,
    pub row: usize,
    pub parameter: Complex64,
    pub tag: ClassificationTag,
    pub evidence: Evidence,
}

fn inside(window: &Window, res: usize, col: usize, row: usize, p: Complex64) -> bool {
    let (dx, dy) = window.cell_size(res);
    let c = window.cell_center(res, col, row);
    // Closed cells: a center on a shared edge belongs to both neighbours,
    // whatever the rounding of the cell centers.
    let slack = 1.0 + 1e-9;
    (p.re - c.re).abs() <= 0.5 * dx * slack && (p.im - c.im).abs() <= 0.5 * dy * slack
}

/// Classifies one cell of the grid.
pub fn scan_cell(k: u32, window: &Window, opts: &ScanOptions, index: usize) -> ScanCell {
    let res = opts.resolution;
    let (col, row) = (index % res, index / res);
    let parameter = window.cell_center(res, col, row);
    let cls = match family_member(k, parameter) {
        Ok(fm) => classify_free_critical(&fm, opts.basin_resolution, opts.max_iter),
        Err(_) => Classification { tag: ClassificationTag::Unresolved, evidence: Evidence::default() },
    };
    let mut cell = ScanCell { index, col, row, parameter, tag: cls.tag, evidence: cls.evidence };
    if opts.snap_centers {
        snap_to_center(k, window, opts, &mut cell);
    }
    cell
}

fn snap_to_center(k: u32, window: &Window, opts: &ScanOptions, cell: &mut ScanCell) {
    let res = opts.resolution;
    let hit = |p: Complex64| inside(window, res, cell.col, cell.row, p);
    match cell.tag {
        ClassificationTag::OtherAttractor => {
            let Some(p) = cell.evidence.attractor_period else { return };
            if let Ok(s) = find_periodic_center(k, p, cell.parameter) {
                if hit(s.parameter) {
                    cell.tag = ClassificationTag::PeriodicCritical;
                    cell.evidence.own_period = Some(p);
                    cell.evidence.center = Some([s.parameter.re, s.parameter.im]);
                }
            }
        }
        ClassificationTag::Capture | ClassificationTag::Immediate if k == 2 => {
            let Some(entry) = cell.evidence.entry_time else { return };
            for t in 1..=entry + 1 {
                if let Ok(s) = find_center(k, t, cell.parameter) {
                    if hit(s.parameter) {
                        cell.tag = ClassificationTag::PeriodicCritical;
                        cell.evidence.landing_time = Some(t);
                        cell.evidence.center = Some([s.parameter.re, s.parameter.im]);
                        return;
                    }
                }
            }
        }
        _ => {}
    }
}

/// Full grid scan, parallel over cells, returned in cell-index order.
pub fn param_scan(k: u32, window: &Window, opts: &ScanOptions) -> Result<Vec<ScanCell>, ClassifyError> {
    if !(k == 1 || k == 2) {
        return Err(ClassifyError::InvalidArgument(format!("family k={k} is not implemented")));
    }
    if opts.resolution == 0 || opts.basin_resolution == 0 {
        return Err(ClassifyError::InvalidArgument("resolution must be positive".into()));
    }
    let n = opts.resolution * opts.resolution;
    Ok((0..n).into_par_iter().map(|i| scan_cell(k, window, opts, i)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_cells() {
        let w = Window::new([-2.2, 0.8], [-1.3, 1.3]).unwrap();
        assert_eq!(w.cell_of(64, Complex64::new(0.0, 0.0)), Some((46, 32)));
        let c = w.cell_center(64, 0, 0);
        assert!((c - Complex64::new(-2.2 + 3.0 / 128.0, 1.3 - 2.6 / 128.0)).norm() < 1e-15);
        assert!(Window::new([1.0, 0.0], [0.0, 1.0]).is_err());
    }

    #[test]
    fn cell_near_origin_snaps() {
        let w = Window::new([-2.2, 0.8], [-1.3, 1.3]).unwrap();
        let opts = ScanOptions { resolution: 64, basin_resolution: 64, ..Default::default() };
        let cell = scan_cell(1, &w, &opts, 32 * 64 + 46);
        assert_eq!(cell.tag, ClassificationTag::PeriodicCritical);
        assert_eq!(cell.evidence.center, Some([0.0, 0.0]));
    }

    #[test]
    fn cell_at_capture_center_snaps() {
        let w = Window::new([1.5, 2.5], [-0.5, 0.5]).unwrap();
        let opts = ScanOptions { resolution: 64, basin_resolution: 128, ..Default::default() };
        let (col, row) = w.cell_of(64, Complex64::new(2.0, 0.0)).unwrap();
        let cell = scan_cell(2, &w, &opts, row * 64 + col);
        assert_eq!(cell.tag, ClassificationTag::PeriodicCritical);
        assert_eq!(cell.evidence.landing_time, Some(2));
    }
}
