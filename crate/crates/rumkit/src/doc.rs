//! Versioned JSON documents and their conversion to and from domain values.

use serde_json::{json, Map, Value};

use rumkit_core::framework::{CVec2, MotifEdge};
use rumkit_core::multigrid::{GridFamily, MultigridSpec, Tiling, Vertex};
use rumkit_core::symbol::SpectrumScan;
use rumkit_core::{Basis2, Complex64, CrystalFramework, LineFigure, ProjLine, Vector2, VelocityField};

use crate::error::{FileError, Result};
use crate::json::{float, pair, Node};

pub const VERSION: &str = "1";

fn invariant(e: rumkit_core::Error) -> FileError {
    FileError::Invariant(e.to_string())
}

fn vec2(v: Vector2) -> Value {
    pair(v.x, v.y)
}

fn read_vec2(n: &Node<'_>) -> Result<Vector2> {
    let [x, y] = n.f64_pair()?;
    Ok(Vector2::new(x, y))
}

fn object(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

// ---------------------------------------------------------------- crystal

pub fn crystal_to_json(c: &CrystalFramework) -> Value {
    let b = c.basis();
    object(vec![
        ("version", json!(VERSION)),
        ("basis", Value::Array(vec![vec2(b.a1), vec2(b.a2)])),
        ("motif_joints", Value::Array(c.motif_joints().iter().map(|p| vec2(*p)).collect())),
        (
            "motif_edges",
            Value::Array(
                c.motif_edges()
                    .iter()
                    .map(|e| json!({"from": e.from, "to": e.to, "offset": e.offset}))
                    .collect(),
            ),
        ),
    ])
}

pub fn crystal_from_json(v: &Value) -> Result<CrystalFramework> {
    let root = Node::root(v);
    root.expect_version()?;
    let basis = root.field("basis")?.array_of_len(2)?;
    let (a1, a2) = (read_vec2(&basis[0])?, read_vec2(&basis[1])?);
    let basis = Basis2::new(a1, a2).map_err(|_| basis[1].err("basis vectors are parallel"))?;
    let joints = root
        .field("motif_joints")?
        .array()?
        .iter()
        .map(read_vec2)
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    for e in root.field("motif_edges")?.array()? {
        edges.push(MotifEdge::new(
            e.field("from")?.usize()?,
            e.field("to")?.usize()?,
            e.field("offset")?.i64_pair()?,
        ));
    }
    CrystalFramework::new(basis, joints, edges).map_err(invariant)
}

// ---------------------------------------------------------------- field

/// A velocity field together with a free-form reference to the framework it
/// lives on (a file name, fixture name or description).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDoc {
    pub framework_ref: String,
    pub field: VelocityField,
}

pub fn field_to_json(d: &FieldDoc) -> Value {
    let values = d
        .field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            object(vec![
                ("joint", json!(i)),
                ("re", pair(v[0].re, v[1].re)),
                ("im", pair(v[0].im, v[1].im)),
            ])
        })
        .collect();
    object(vec![
        ("version", json!(VERSION)),
        ("framework_ref", json!(d.framework_ref)),
        ("values", Value::Array(values)),
    ])
}

pub fn field_from_json(v: &Value) -> Result<FieldDoc> {
    let root = Node::root(v);
    root.expect_version()?;
    let framework_ref = root.field("framework_ref")?.str()?.to_string();
    let entries = root.field("values")?.array()?;
    let mut values: Vec<Option<CVec2>> = vec![None; entries.len()];
    for e in &entries {
        let joint = e.field("joint")?;
        let j = joint.usize()?;
        let re = e.field("re")?.f64_pair()?;
        let im = e.field("im")?.f64_pair()?;
        let slot = values
            .get_mut(j)
            .ok_or_else(|| FileError::Invariant(format!("joint {j} out of range for {} values", entries.len())))?;
        if slot.is_some() {
            return Err(FileError::Invariant(format!("joint {j} listed twice")));
        }
        *slot = Some([Complex64::new(re[0], im[0]), Complex64::new(re[1], im[1])]);
    }
    let values = values
        .into_iter()
        .map(|v| v.expect("every slot filled: n entries, n distinct joints < n"))
        .collect();
    Ok(FieldDoc {
        framework_ref,
        field: VelocityField { values },
    })
}

// ---------------------------------------------------------------- tiling

pub fn spec_to_json(s: &MultigridSpec) -> Value {
    let families = s
        .families()
        .iter()
        .map(|f| {
            object(vec![
                ("normal", vec2(f.normal)),
                ("offset", float(f.offset)),
                ("edge", vec2(f.edge)),
            ])
        })
        .collect();
    object(vec![("families", Value::Array(families)), ("window", float(s.window()))])
}

pub fn spec_from_node(n: &Node<'_>) -> Result<MultigridSpec> {
    let mut families = Vec::new();
    for f in n.field("families")?.array()? {
        families.push(GridFamily {
            normal: read_vec2(&f.field("normal")?)?,
            offset: f.field("offset")?.f64()?,
            edge: read_vec2(&f.field("edge")?)?,
        });
    }
    MultigridSpec::new(families, n.field("window")?.f64()?).map_err(invariant)
}

pub fn tiling_to_json(t: &Tiling) -> Value {
    let vertices = t
        .vertices
        .iter()
        .map(|v| object(vec![("K", json!(v.k)), ("pos", vec2(v.pos))]))
        .collect();
    let tiles = t
        .tiles
        .iter()
        .map(|tile| json!({"families": tile.families, "indices": tile.indices, "verts": tile.verts}))
        .collect();
    object(vec![
        ("version", json!(VERSION)),
        ("spec", spec_to_json(&t.spec)),
        ("vertices", Value::Array(vertices)),
        ("tiles", Value::Array(tiles)),
    ])
}

pub fn tiling_from_json(v: &Value) -> Result<Tiling> {
    let root = Node::root(v);
    root.expect_version()?;
    let spec = spec_from_node(&root.field("spec")?)?;
    let mut vertices = Vec::new();
    for n in root.field("vertices")?.array()? {
        let k = n.field("K")?.array()?.iter().map(|x| x.i64()).collect::<Result<Vec<_>>>()?;
        vertices.push(Vertex {
            k,
            pos: read_vec2(&n.field("pos")?)?,
        });
    }
    let mut raw = Vec::new();
    for n in root.field("tiles")?.array()? {
        let f = n.field("families")?.array_of_len(2)?;
        let verts = n.field("verts")?.array_of_len(4)?;
        raw.push((
            [f[0].usize()?, f[1].usize()?],
            n.field("indices")?.i64_pair()?,
            [verts[0].usize()?, verts[1].usize()?, verts[2].usize()?, verts[3].usize()?],
        ));
    }
    Tiling::from_parts(spec, vertices, raw).map_err(invariant)
}

// ---------------------------------------------------------------- figure

/// A line figure with a label saying what it is (`rum`, `ribbon`,
/// `slippage`, `limit`, ...) and which space it lives in.
#[derive(Debug, Clone)]
pub struct FigureDoc {
    pub kind: String,
    pub space: Space,
    pub figure: LineFigure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Ambient,
    Reciprocal,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Ambient => "ambient",
            Space::Reciprocal => "reciprocal",
        }
    }
}

pub fn figure_to_json(d: &FigureDoc) -> Value {
    let lines = d
        .figure
        .lines()
        .iter()
        .map(|l| object(vec![("angle_rad", float(l.angle())), ("dir", vec2(l.direction()))]))
        .collect();
    object(vec![
        ("version", json!(VERSION)),
        ("kind", json!(d.kind)),
        ("space", json!(d.space.name())),
        ("lines", Value::Array(lines)),
    ])
}

pub fn figure_from_json(v: &Value) -> Result<FigureDoc> {
    let root = Node::root(v);
    root.expect_version()?;
    let kind = root.field("kind")?.str()?.to_string();
    let space_node = root.field("space")?;
    let space = match space_node.str()? {
        "ambient" => Space::Ambient,
        "reciprocal" => Space::Reciprocal,
        _ => return Err(space_node.err("expected \"ambient\" or \"reciprocal\"")),
    };
    let mut figure = LineFigure::new();
    for n in root.field("lines")?.array()? {
        let a = n.field("angle_rad")?;
        if !figure.insert(ProjLine::from_angle(a.f64()?)) {
            return Err(FileError::Invariant(format!("{}: duplicate line", n.path())));
        }
    }
    Ok(FigureDoc { kind, space, figure })
}

// ---------------------------------------------------------------- scan

pub fn scan_to_json(s: &SpectrumScan) -> Value {
    object(vec![
        ("version", json!(VERSION)),
        ("resolution", json!(s.resolution)),
        ("tol", float(s.tol)),
        ("sigma_min", Value::Array(s.samples.iter().map(|x| float(*x)).collect())),
    ])
}

pub fn scan_from_json(v: &Value) -> Result<SpectrumScan> {
    let root = Node::root(v);
    root.expect_version()?;
    let resolution = root.field("resolution")?.usize()?;
    let tol = root.field("tol")?.f64()?;
    let samples = root
        .field("sigma_min")?
        .array_of_len(resolution * resolution)?
        .iter()
        .map(|n| n.f64())
        .collect::<Result<Vec<_>>>()?;
    let rows = samples.chunks(resolution.max(1)).map(|r| r.to_vec()).collect();
    SpectrumScan::from_rows(resolution, rows, tol).map_err(invariant)
}

/// Any of the documents above, told apart by their fields.
pub enum Document {
    Crystal(CrystalFramework),
    Tiling(Tiling),
    Figure(FigureDoc),
    Field(FieldDoc),
    Scan(SpectrumScan),
}

pub fn document_from_json(v: &Value) -> Result<Document> {
    let o = Node::root(v);
    let has = |k: &str| o.value.get(k).is_some();
    if has("motif_joints") {
        crystal_from_json(v).map(Document::Crystal)
    } else if has("tiles") {
        tiling_from_json(v).map(Document::Tiling)
    } else if has("lines") {
        figure_from_json(v).map(Document::Figure)
    } else if has("framework_ref") {
        field_from_json(v).map(Document::Field)
    } else if has("sigma_min") {
        scan_from_json(v).map(Document::Scan)
    } else {
        o.object()?;
        Err(o.err("unrecognised document"))
    }
}
