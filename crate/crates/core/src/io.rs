//! JSON network format and number formatting.
//!
//! ```json
//! { "dim": 2,
//!   "vertices": [{"id": 0, "pos": [0.0, 0.0]}],
//!   "lattice": [[1.0, 0.0], [0.0, 1.0]],
//!   "edges": [{"tail": 0, "head": 0, "shift": [1, 0]}] }
//! ```
//!
//! `lattice` lists the basis columns. Floats are written with 17
//! significant digits so that parsing restores them exactly.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Edge, QuotientGraph};
use crate::lattice::Lattice;
use crate::network::PeriodicNetwork;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub pos: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub dim: usize,
    pub vertices: Vec<VertexRecord>,
    pub lattice: Vec<Vec<f64>>,
    pub edges: Vec<Edge>,
}

impl NetworkRecord {
    pub fn from_network(net: &PeriodicNetwork) -> Self {
        NetworkRecord {
            dim: net.dim(),
            vertices: net
                .positions()
                .iter()
                .enumerate()
                .map(|(id, p)| VertexRecord { id, pos: p.iter().copied().collect() })
                .collect(),
            lattice: net.lattice().columns(),
            edges: net.graph().edges().to_vec(),
        }
    }

    pub fn to_network(&self) -> Result<PeriodicNetwork> {
        let mut positions = vec![None; self.vertices.len()];
        for v in &self.vertices {
            let slot = positions.get_mut(v.id).ok_or(Error::UnknownVertex(v.id))?;
            if slot.is_some() {
                return Err(Error::InvalidGraph(format!("vertex id {} listed twice", v.id)));
            }
            *slot = Some(v.pos.clone());
        }
        let positions: Vec<Vec<f64>> = positions.into_iter().map(|p| p.expect("ids are a permutation")).collect();
        if self.lattice.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: self.lattice.len() });
        }
        let lattice = Lattice::from_columns(&self.lattice)?;
        let graph = QuotientGraph::new(self.dim, positions.len(), self.edges.clone())?;
        PeriodicNetwork::from_coordinates(graph, lattice, &positions)
    }
}

/// `%.{digits}g`-style formatting: shortest fixed or exponential form with
/// the given number of significant digits, trailing zeros removed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{:.*}", decimals, x);
    let t = trim_zeros(&fixed);
    if t.contains('.') {
        t
    } else {
        format!("{t}.0")
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0');
        t.strip_suffix('.').map(|u| format!("{u}.0")).unwrap_or_else(|| t.to_string())
    } else {
        s.to_string()
    }
}

/// serde_json formatter writing floats with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct SigFormatter {
    pretty_depth: Option<usize>,
}

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_sig(value, 17).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        if let Some(d) = self.pretty_depth {
            writer.write_all(b"\n")?;
            writer.write_all("  ".repeat(d).as_bytes())?;
        }
        Ok(())
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(if self.pretty_depth.is_some() { b": " } else { b":" })
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        if let Some(d) = self.pretty_depth.as_mut() {
            *d += 1;
        }
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        if let Some(d) = self.pretty_depth.as_mut() {
            *d -= 1;
            writer.write_all(b"\n")?;
            writer.write_all("  ".repeat(*d).as_bytes())?;
        }
        writer.write_all(b"}")
    }
}

/// Serializes any value with 17-digit floats; `pretty` breaks objects over
/// lines and keeps arrays inline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T, pretty: bool) -> Result<String> {
    let mut buf = Vec::new();
    let fmt = SigFormatter { pretty_depth: pretty.then_some(0) };
    let mut ser = Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn network_to_json(net: &PeriodicNetwork) -> Result<String> {
    to_json_string(&NetworkRecord::from_network(net), true)
}

/// Parses the network format; unknown top-level keys are ignored.
pub fn network_from_json(text: &str) -> Result<PeriodicNetwork> {
    let rec: NetworkRecord = serde_json::from_str(text)?;
    rec.to_network()
}

pub fn network_to_value(net: &PeriodicNetwork) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(NetworkRecord::from_network(net))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Multigraph;

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.1, 17), "0.10000000000000001");
        assert_eq!(format_sig(1.0, 17), "1.0");
        assert_eq!(format_sig(-2.5, 10), "-2.5");
        assert_eq!(format_sig(20.784609690826528, 10), "20.78460969");
        assert_eq!(format_sig(1.5e-7, 17), "1.4999999999999999e-7");
        assert_eq!(format_sig(1e20, 10), "1.0e20");
    }

    #[test]
    fn floats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 3f64.sqrt() / 4.0, -1e-300, 6.02e23, 0.0] {
            let s = format_sig(x, 17);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn duplicate_vertex_id_rejected() {
        let text = r#"{"dim":1,"vertices":[{"id":0,"pos":[0]},{"id":0,"pos":[0.5]}],
            "lattice":[[1]],"edges":[{"tail":0,"head":1,"shift":[0]}]}"#;
        assert!(network_from_json(text).is_err());
    }

    #[test]
    fn vertex_count_checked() {
        let text = r#"{"dim":1,"vertices":[{"id":1,"pos":[0]}],"lattice":[[1]],"edges":[]}"#;
        assert!(matches!(network_from_json(text), Err(Error::UnknownVertex(1))));
    }

    #[test]
    fn graph_vertex_count_from_records() {
        let text = r#"{"dim":1,"vertices":[{"id":0,"pos":[0]}],"lattice":[[2]],"edges":[{"tail":0,"head":0,"shift":[1]}]}"#;
        let net = network_from_json(text).unwrap();
        assert_eq!(net.graph().vertex_count(), 1);
        assert_eq!(net.length().unwrap(), 2.0);
    }
}
