//! On-disk artifacts: field JSON, entropy CSV, SVG, and a file set that is
//! rolled back when a run fails.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::aot::AotField;

/// Neighbour offsets `(dt, dx)` in the order of [`FieldRecord::contributions`].
pub const NEIGHBOR_ORDER: [(i64, i64); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldRecord {
    pub t: f64,
    pub x: usize,
    pub v_t: f64,
    pub v_x: f64,
    /// Influence from each neighbour in [`NEIGHBOR_ORDER`]; `None` where the
    /// lattice ends.
    pub contributions: [Option<f64>; 8],
}

pub fn field_records(field: &AotField, dt: f64) -> Vec<FieldRecord> {
    let mut out = Vec::new();
    for row in &field.vectors {
        for v in row {
            let mut contributions = [None; 8];
            for c in &v.contributions {
                let off = (c.t_index as i64 - v.t_index as i64, c.x_index as i64 - v.x_index as i64);
                let slot = NEIGHBOR_ORDER.iter().position(|o| *o == off).expect("neighbour offset");
                contributions[slot] = Some(c.ci);
            }
            out.push(FieldRecord { t: v.t_index as f64 * dt, x: v.x_index, v_t: v.v_t, v_x: v.v_x, contributions });
        }
    }
    out
}

pub fn entropy_csv(field: &AotField, dt: f64) -> String {
    let mut s = String::from("t,x,von_neumann,renyi2\n");
    for (t, (vn, r2)) in field.entropy.von_neumann.iter().zip(&field.entropy.renyi2).enumerate() {
        for (x, (a, b)) in vn.iter().zip(r2).enumerate() {
            writeln!(s, "{},{x},{a},{b}", t as f64 * dt).unwrap();
        }
    }
    s
}

const CELL_W: f64 = 48.0;
const PLOT_H: f64 = 480.0;
const MARGIN: f64 = 40.0;
const MAX_ARROW_ROWS: usize = 30;

/// Entropy heatmap (white 0 to red ln 2) with an arrow per site on a
/// subsampled set of slices. Time runs upward.
pub fn field_svg(field: &AotField, dt: f64, title: &str) -> String {
    let rows = field.vectors.len();
    let n = field.vectors.first().map_or(0, Vec::len);
    let cell_h = PLOT_H / rows as f64;
    let w = 2.0 * MARGIN + CELL_W * n as f64;
    let h = 2.0 * MARGIN + PLOT_H;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    let y_of = |t: usize| MARGIN + PLOT_H - (t as f64 + 1.0) * cell_h;
    for (t, row) in field.entropy.von_neumann.iter().enumerate() {
        for (x, e) in row.iter().enumerate() {
            let f = (e / std::f64::consts::LN_2).clamp(0.0, 1.0);
            let gb = (255.0 * (1.0 - f)).round() as u8;
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.3}" width="{CELL_W}" height="{:.3}" fill="rgb(255,{gb},{gb})"/>"#,
                MARGIN + x as f64 * CELL_W,
                y_of(t),
                cell_h + 0.01
            )
            .unwrap();
        }
    }
    // arrows in lattice units, (v_x / dx, v_t / dt), one global scale
    let stride = rows.div_ceil(MAX_ARROW_ROWS).max(1);
    let vec_of = |t: usize, x: usize| {
        let v = field.get(t, x);
        (v.v_x, v.v_t / dt)
    };
    let vmax = (0..rows)
        .step_by(stride)
        .flat_map(|t| (0..n).map(move |x| (t, x)))
        .map(|(t, x)| {
            let (a, b) = vec_of(t, x);
            a.hypot(b)
        })
        .fold(0.0, f64::max);
    let len = 0.45 * CELL_W.min(cell_h * stride as f64);
    writeln!(s, "<desc>arrow length {len:.2}px at |v| = {vmax:e}; time upward, dt = {dt}</desc>").unwrap();
    s.push_str(r#"<g stroke="black" stroke-width="1.2" fill="none">"#);
    s.push('\n');
    if vmax > 0.0 {
        for t in (0..rows).step_by(stride) {
            for x in 0..n {
                let (vx, vt) = vec_of(t, x);
                let cx = MARGIN + (x as f64 + 0.5) * CELL_W;
                let cy = y_of(t) + 0.5 * cell_h;
                let ex = cx + len * vx / vmax;
                let ey = cy - len * vt / vmax;
                writeln!(s, r#"<line x1="{cx:.2}" y1="{cy:.2}" x2="{ex:.2}" y2="{ey:.2}"/>"#).unwrap();
                writeln!(s, r#"<circle cx="{ex:.2}" cy="{ey:.2}" r="1.5" fill="black"/>"#).unwrap();
            }
        }
    }
    s.push_str("</g>\n");
    writeln!(s, r#"<text x="{MARGIN}" y="{}" font-size="12">x</text>"#, h - 12.0).unwrap();
    writeln!(s, r#"<text x="8" y="{MARGIN}" font-size="12">t</text>"#).unwrap();
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Files written by one run. Dropping without [`OutputSet::commit`] removes
/// them, and the directory if this set created it.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn create(dir: &Path) -> io::Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(OutputSet { dir: dir.to_path_buf(), created_dir, files: Vec::new(), committed: false })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        fs::write(&path, contents)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> io::Result<PathBuf> {
        let mut text = serde_json::to_vec_pretty(value).map_err(io::Error::other)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.files)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aot::{aot_field, SpacetimeLattice};
    use crate::hamlib::build_ising;
    use crate::qcore::StateVector;

    fn small_field() -> AotField {
        let h = build_ising(3, 1.0, 0.3, -0.2).unwrap();
        let lat = SpacetimeLattice::new(StateVector::from_label("0+0").unwrap(), h, 0.05, 2).unwrap();
        aot_field(&lat).unwrap()
    }

    #[test]
    fn records_fill_slots_and_leave_edges_empty() {
        let f = small_field();
        let r = field_records(&f, 0.05);
        assert_eq!(r.len(), 9);
        let corner = &r[0];
        assert_eq!(corner.contributions.iter().filter(|c| c.is_some()).count(), 3);
        let centre = &r[4];
        assert!(centre.contributions.iter().all(Option::is_some));
        assert_eq!(centre.contributions[3], Some(0.0));
        let csv = entropy_csv(&f, 0.05);
        assert_eq!(csv.lines().count(), 10);
        assert!(csv.starts_with("t,x,von_neumann,renyi2\n"));
        let svg = field_svg(&f, 0.05, "a<b");
        assert!(svg.contains("a&lt;b") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn uncommitted_sets_are_removed() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("out");
        {
            let mut set = OutputSet::create(&dir).unwrap();
            set.write("a.txt", b"x").unwrap();
            assert!(dir.join("a.txt").exists());
        }
        assert!(!dir.exists());
        let mut set = OutputSet::create(&dir).unwrap();
        set.write("a.txt", b"x").unwrap();
        set.commit();
        assert!(dir.join("a.txt").exists());
    }
}
