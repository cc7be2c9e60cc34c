//! Delimited text export of a [`FrameResult`].
//!
//! ```text
//! # gelforce-result 1
//! # timestamp,<s>
//! # valid,<true|false>
//! # matched,<count>
//! # patch,<cx_m>,<cy_m>,<radius_m>,<sphere_radius_m>     (or `# patch,none`)
//! # resultant_n,<fx>,<fy>,<fz>
//! # reaction_n,<fx>,<fy>,<fz>
//! # timings_ms,<matching>,<contact_fit>,<compensation>,<interpolation>,<reconstruction>,<total>
//! # note,<free text>                                      (optional)
//! node,x,y,z,ux,uy,uz,fx,fy,fz
//! <one row per node, meters and newtons>
//! ```
//!
//! Numbers use shortest round-trip formatting, so reading back is exact.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{DisplacementField, ForceField};
use crate::mesh::HexMesh;
use crate::optics::ContactPatch;
use crate::pipeline::{FrameResult, StageTimings};

pub const RESULT_HEADER: &str = "# gelforce-result 1";

#[derive(Serialize, Deserialize)]
struct NodeRow {
    node: usize,
    x: f64,
    y: f64,
    z: f64,
    ux: f64,
    uy: f64,
    uz: f64,
    fx: f64,
    fy: f64,
    fz: f64,
}

fn err(msg: impl Into<String>) -> Error {
    Error::format("frame result", msg)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_result<W: Write>(result: &FrameResult, mesh: &HexMesh, mut out: W) -> Result<()> {
    if result.force.len() != mesh.node_count() || result.displacement.len() != mesh.node_count() {
        return Err(Error::Conformance("result does not match the mesh".into()));
    }
    let t = &result.timings;
    let mut head = format!(
        "{RESULT_HEADER}\n# timestamp,{}\n# valid,{}\n# matched,{}\n",
        result.timestamp, result.valid, result.matched
    );
    match &result.patch {
        Some(p) => {
            head += &format!(
                "# patch,{}\n",
                join(&[p.center[0], p.center[1], p.radius, p.indenter_radius])
            )
        }
        None => head += "# patch,none\n",
    }
    head += &format!("# resultant_n,{}\n", join(&result.resultant));
    head += &format!("# reaction_n,{}\n", join(&result.reaction));
    head += &format!(
        "# timings_ms,{}\n",
        join(&[
            t.matching_ms,
            t.contact_fit_ms,
            t.compensation_ms,
            t.interpolation_ms,
            t.reconstruction_ms,
            t.total_ms
        ])
    );
    if let Some(note) = &result.note {
        head += &format!("# note,{}\n", note.replace('\n', " "));
    }
    out.write_all(head.as_bytes())
        .map_err(|e| err(e.to_string()))?;
    let mut w = csv::Writer::from_writer(out);
    for (node, p) in mesh.nodes().iter().enumerate() {
        let u = result.displacement[node];
        let f = result.force[node];
        w.serialize(NodeRow {
            node,
            x: p[0],
            y: p[1],
            z: p[2],
            ux: u[0],
            uy: u[1],
            uz: u[2],
            fx: f[0],
            fy: f[1],
            fz: f[2],
        })
        .map_err(|e| err(e.to_string()))?;
    }
    w.flush().map_err(|e| err(e.to_string()))
}

fn numbers<const N: usize>(field: &str, rest: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = rest
        .split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| err(format!("bad number in `{field}`")))
        })
        .collect::<Result<_>>()?;
    v.try_into()
        .map_err(|_| err(format!("`{field}` needs {N} values")))
}

/// Parses a result file back. Node coordinates are checked for presence but
/// not returned; the mesh is the authority on geometry.
pub fn read_result<R: Read>(input: R) -> Result<FrameResult> {
    let mut reader = BufReader::new(input);
    let mut line = String::new();
    let mut result = FrameResult {
        timestamp: 0.0,
        valid: false,
        note: None,
        patch: None,
        matched: 0,
        displacement: DisplacementField::zeros(0),
        force: ForceField::zeros(0),
        resultant: [0.0; 3],
        reaction: [0.0; 3],
        timings: StageTimings::default(),
    };
    let mut first = true;
    let mut table = String::new();
    loop {
        line.clear();
        if reader
            .read_line(&mut line)
            .map_err(|e| err(e.to_string()))?
            == 0
        {
            break;
        }
        let l = line.trim_end_matches(['\n', '\r']);
        if first {
            if l != RESULT_HEADER {
                return Err(err(format!("expected `{RESULT_HEADER}`")));
            }
            first = false;
            continue;
        }
        let Some(meta) = l.strip_prefix("# ") else {
            table.push_str(&line);
            reader
                .read_to_string(&mut table)
                .map_err(|e| err(e.to_string()))?;
            break;
        };
        let (key, rest) = meta
            .split_once(',')
            .ok_or_else(|| err("malformed summary line"))?;
        match key {
            "timestamp" => result.timestamp = numbers::<1>(key, rest)?[0],
            "valid" => {
                result.valid = rest
                    .parse()
                    .map_err(|_| err("`valid` must be true or false"))?
            }
            "matched" => result.matched = rest.parse().map_err(|_| err("bad `matched` count"))?,
            "patch" if rest == "none" => result.patch = None,
            "patch" => {
                let [cx, cy, a, r] = numbers::<4>(key, rest)?;
                result.patch = Some(ContactPatch::new([cx, cy], a, r)?);
            }
            "resultant_n" => result.resultant = numbers::<3>(key, rest)?,
            "reaction_n" => result.reaction = numbers::<3>(key, rest)?,
            "timings_ms" => {
                let [m, c, p, i, r, t] = numbers::<6>(key, rest)?;
                result.timings = StageTimings {
                    matching_ms: m,
                    contact_fit_ms: c,
                    compensation_ms: p,
                    interpolation_ms: i,
                    reconstruction_ms: r,
                    total_ms: t,
                };
            }
            "note" => result.note = Some(rest.to_string()),
            other => return Err(err(format!("unknown summary field `{other}`"))),
        }
    }
    if first {
        return Err(err("empty file"));
    }
    let mut u = Vec::new();
    let mut f = Vec::new();
    for (k, row) in csv::Reader::from_reader(table.as_bytes())
        .deserialize::<NodeRow>()
        .enumerate()
    {
        let row = row.map_err(|e| err(e.to_string()))?;
        if row.node != k {
            return Err(err(format!("node rows out of order at {k}")));
        }
        u.push([row.ux, row.uy, row.uz]);
        f.push([row.fx, row.fy, row.fz]);
    }
    result.displacement = DisplacementField::from_vec(u)?;
    result.force = ForceField::from_vec(f)?;
    Ok(result)
}

pub fn write_result_file(result: &FrameResult, mesh: &HexMesh, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_result(result, mesh, std::io::BufWriter::new(f))
}

pub fn read_result_file(path: &Path) -> Result<FrameResult> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_result(f)
}
