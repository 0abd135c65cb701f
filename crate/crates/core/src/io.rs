//! File formats: model documents, walk records, CSV and mesh exports.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::HullMesh;
use crate::pipeline::{Point3, Walk3D};
use crate::stepset::{Step3, WeightedStepSet3};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelStep {
    pub step: [i64; 3],
    #[serde(default = "one")]
    pub weight: u64,
}

fn one() -> u64 {
    1
}

/// `{"steps": [{"step": [i,j,k], "weight": w}, ...], "max_den": d, "seed": s}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub steps: Vec<ModelStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_den: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_stepset(w: &WeightedStepSet3) -> Self {
        ModelFile {
            steps: w
                .entries()
                .iter()
                .map(|(s, wt)| ModelStep {
                    step: s.as_array(),
                    weight: *wt,
                })
                .collect(),
            max_den: None,
            seed: None,
        }
    }

    pub fn stepset(&self) -> Result<WeightedStepSet3> {
        WeightedStepSet3::validate(self.steps.iter().map(|s| (Step3::from(s.step), s.weight)))
    }
}

/// One line of a walk-record file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub model: String,
    pub seed: u64,
    pub length: usize,
    pub steps: Vec<[i64; 3]>,
}

impl WalkRecord {
    pub fn new(model: &str, seed: u64, walk: &Walk3D) -> Self {
        WalkRecord {
            model: model.to_owned(),
            seed,
            length: walk.len(),
            steps: walk.steps.iter().map(Step3::as_array).collect(),
        }
    }

    pub fn walk(&self) -> Result<Walk3D> {
        if self.steps.len() != self.length {
            return Err(Error::LengthMismatch(format!(
                "record declares length {} but has {} steps",
                self.length,
                self.steps.len()
            )));
        }
        Ok(Walk3D {
            steps: self.steps.iter().map(|s| Step3::from(*s)).collect(),
        })
    }
}

/// Writes one JSON document per line.
pub fn write_records<W: Write>(out: &mut W, records: &[WalkRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Writes a trailing `{"summary": ...}` line.
pub fn write_summary<W: Write, T: Serialize>(out: &mut W, summary: &T) -> Result<()> {
    let line = serde_json::json!({ "summary": summary });
    serde_json::to_writer(&mut *out, &line).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Reads walk records, skipping blank lines and summary lines.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<WalkRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        if value.get("summary").is_some() {
            continue;
        }
        let rec: WalkRecord = serde_json::from_value(value)
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        rec.walk()?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Ply,
    Obj,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "ply" => Ok(ExportFormat::Ply),
            "obj" => Ok(ExportFormat::Obj),
            _ => Err(Error::UnknownFormat(s.to_owned())),
        }
    }
}

/// Full-saturation, full-value colour at `hue` degrees, channels rounded.
pub fn hue_rgb(hue: f64) -> [u8; 3] {
    let h = hue.rem_euclid(360.0) / 60.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [r, g, b].map(|c: f64| (255.0 * c).round() as u8)
}

/// Hue of position `i` of a walk with `len` steps: red at the start,
/// magenta at the end.
pub fn step_hue(i: usize, len: usize) -> f64 {
    if len == 0 {
        0.0
    } else {
        300.0 * i as f64 / len as f64
    }
}

pub fn csv_string(walks: &[Walk3D]) -> String {
    let mut s = String::from("walk_id,step_index,x,y,z\n");
    for (id, w) in walks.iter().enumerate() {
        for (i, p) in w.positions().iter().enumerate() {
            let _ = writeln!(s, "{id},{i},{},{},{}", p[0], p[1], p[2]);
        }
    }
    s
}

/// Reads the CSV produced by [`csv_string`] back into position sequences.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<Point3>>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("walk_id,step_index,x,y,z") => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    let mut out: Vec<Vec<Point3>> = Vec::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<i64> = line
            .split(',')
            .map(|f| f.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("CSV row {}: {e}", n + 2)))?;
        let [id, idx, x, y, z] = fields[..] else {
            return Err(Error::Parse(format!(
                "CSV row {} has {} fields",
                n + 2,
                fields.len()
            )));
        };
        let (id, idx) = (id as usize, idx as usize);
        if id == out.len() && idx == 0 {
            out.push(Vec::new());
        }
        match out.get_mut(id) {
            Some(walk) if walk.len() == idx => walk.push([x, y, z]),
            _ => return Err(Error::Parse(format!("CSV row {} out of order", n + 2))),
        }
    }
    Ok(out)
}

/// ASCII PLY with coloured vertices and one edge per step.
pub fn ply_string(walks: &[Walk3D]) -> String {
    let vertices: usize = walks.iter().map(|w| w.len() + 1).sum();
    let edges: usize = walks.iter().map(Walk3D::len).sum();
    let mut s = String::new();
    let _ = write!(
        s,
        "ply\nformat ascii 1.0\nelement vertex {vertices}\nproperty float x\nproperty float y\n\
         property float z\nproperty uchar red\nproperty uchar green\nproperty uchar blue\n\
         element edge {edges}\nproperty int vertex1\nproperty int vertex2\nend_header\n"
    );
    for w in walks {
        for (i, p) in w.positions().iter().enumerate() {
            let [r, g, b] = hue_rgb(step_hue(i, w.len()));
            let _ = writeln!(s, "{} {} {} {r} {g} {b}", p[0], p[1], p[2]);
        }
    }
    let mut base = 0;
    for w in walks {
        for i in 0..w.len() {
            let _ = writeln!(s, "{} {}", base + i, base + i + 1);
        }
        base += w.len() + 1;
    }
    s
}

/// Wavefront OBJ: vertices plus one polyline per walk.
pub fn obj_string(walks: &[Walk3D]) -> String {
    let mut s = String::new();
    for w in walks {
        for p in w.positions() {
            let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
        }
    }
    let mut base = 1;
    for w in walks {
        let idx: Vec<String> = (base..base + w.len() + 1).map(|i| i.to_string()).collect();
        let tag = if w.is_empty() { "p" } else { "l" };
        let _ = writeln!(s, "{tag} {}", idx.join(" "));
        base += w.len() + 1;
    }
    s
}

pub fn export_string(format: ExportFormat, walks: &[Walk3D]) -> String {
    match format {
        ExportFormat::Csv => csv_string(walks),
        ExportFormat::Ply => ply_string(walks),
        ExportFormat::Obj => obj_string(walks),
    }
}

/// Triangle mesh as OBJ, 1-based face indices.
pub fn hull_obj_string(mesh: &HullMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

/// Point cloud as OBJ, for inputs with no 3D hull.
pub fn points_obj_string(points: &[[f64; 3]]) -> String {
    let mut s = String::from("# degenerate hull: points only\n");
    for v in points {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for i in 1..=points.len() {
        let _ = writeln!(s, "p {i}");
    }
    s
}

/// Position of each walk after `t` steps, or its endpoint if shorter.
pub fn positions_at(walks: &[Walk3D], t: usize) -> Vec<[f64; 3]> {
    walks
        .iter()
        .map(|w| {
            let p = w
                .steps
                .iter()
                .take(t)
                .fold([0i64; 3], |p, s| [p[0] + s.dx, p[1] + s.dy, p[2] + s.dz]);
            p.map(|c| c as f64)
        })
        .collect()
}
