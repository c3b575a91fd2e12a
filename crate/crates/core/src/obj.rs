//! Wavefront OBJ export of a finite block of the lift.

use std::collections::HashMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::network::PeriodicNetwork;

/// Writes one `l` record for every quotient edge starting in each of the
/// `cells^n` translates, with `v` records for all endpoints (deduplicated by
/// vertex and cell). Plane networks get z = 0.
pub fn export_obj(net: &PeriodicNetwork, cells: usize) -> Result<String> {
    let n = net.dim();
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported(format!("OBJ export needs dimension 2 or 3, got {n}")));
    }
    if cells == 0 {
        return Err(Error::InvalidParameter("cells must be positive".into()));
    }
    let mut index: HashMap<(usize, Vec<i64>), usize> = HashMap::new();
    let mut vertex_lines = String::new();
    let mut line_records = String::new();

    let mut vertex_id = |v: usize, cell: Vec<i64>, out: &mut String| -> usize {
        if let Some(&i) = index.get(&(v, cell.clone())) {
            return i;
        }
        let p = &net.positions()[v] + net.lattice().vector(&cell);
        let z = if n == 3 { p[2] } else { 0.0 };
        writeln!(out, "v {} {} {}", p[0], p[1], z).expect("string write");
        let i = index.len() + 1;
        index.insert((v, cell), i);
        i
    };

    let total = cells.pow(n as u32);
    for flat in 0..total {
        let mut cell = vec![0i64; n];
        let mut rest = flat;
        for c in cell.iter_mut() {
            *c = (rest % cells) as i64;
            rest /= cells;
        }
        for e in net.graph().edges() {
            let a = vertex_id(e.tail, cell.clone(), &mut vertex_lines);
            let target: Vec<i64> = cell.iter().zip(&e.shift).map(|(c, s)| c + s).collect();
            let b = vertex_id(e.head, target, &mut vertex_lines);
            writeln!(line_records, "l {a} {b}").expect("string write");
        }
    }
    Ok(format!("# periodic network, {cells}^{n} cells\n{vertex_lines}{line_records}"))
}
