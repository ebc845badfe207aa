//! Point-cloud CSV: `x[,y[,z]],role,nx[,ny[,nz]][,u]`, one row per node,
//! reals written with 17 significant digits.

use std::io::{BufRead, Write};

use super::{NodeRole, NodeSet};
use crate::error::{Error, Result};

const AXES: [&str; 3] = ["x", "y", "z"];
const NORMAL_AXES: [&str; 3] = ["nx", "ny", "nz"];

fn header(dim: usize, with_u: bool) -> String {
    let mut cols: Vec<&str> = AXES[..dim].to_vec();
    cols.push("role");
    cols.extend(&NORMAL_AXES[..dim]);
    if with_u {
        cols.push("u");
    }
    cols.join(",")
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(nodes: &NodeSet, out: &mut impl Write) -> Result<()> {
    write_rows(nodes, None, out)
}

/// Node-set CSV with an appended `u` column.
pub fn write_csv_with_values(nodes: &NodeSet, values: &[f64], out: &mut impl Write) -> Result<()> {
    if values.len() != nodes.len() {
        return Err(Error::Input("value count differs from node count".into()));
    }
    write_rows(nodes, Some(values), out)
}

fn write_rows(nodes: &NodeSet, values: Option<&[f64]>, out: &mut impl Write) -> Result<()> {
    let d = nodes.dim;
    writeln!(out, "{}", header(d, values.is_some()))?;
    for i in 0..nodes.len() {
        let mut row: Vec<String> = nodes.positions[i][..d].iter().map(|&v| fmt(v)).collect();
        row.push(nodes.roles[i].as_str().to_string());
        row.extend(nodes.normals[i][..d].iter().map(|&v| fmt(v)));
        if let Some(u) = values {
            row.push(fmt(u[i]));
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a node CSV written by [`write_csv`]. Spacing, seed, corner flags and
/// ghost links are not part of the format and come back as defaults.
pub fn read_csv(input: impl BufRead) -> Result<NodeSet> {
    let mut lines = input.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Parse("empty node file".into()))??;
    let cols: Vec<&str> = head.trim().split(',').collect();
    let dim = cols.iter().position(|c| *c == "role").unwrap_or(0);
    if !(1..=3).contains(&dim) || cols.len() < 2 * dim + 1 || cols[..dim] != AXES[..dim] {
        return Err(Error::Parse(format!("unrecognised header '{head}'")));
    }
    let mut nodes = NodeSet::empty(dim, 0.0, 0);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() < 2 * dim + 1 {
            return Err(Error::Parse(format!("line {}: too few fields", lineno + 2)));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 2)))
        };
        let mut p = [0.0; 3];
        let mut n = [0.0; 3];
        for k in 0..dim {
            p[k] = num(f[k])?;
            n[k] = num(f[dim + 1 + k])?;
        }
        let role = NodeRole::parse(f[dim])
            .ok_or_else(|| Error::Parse(format!("line {}: unknown role '{}'", lineno + 2, f[dim])))?;
        nodes.positions.push(p);
        nodes.roles.push(role);
        nodes.normals.push(n);
        nodes.corners.push(false);
        nodes.ghost_parent.push(None);
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::nodegen::fill_advancing_front;
    use proptest::prelude::*;

    #[test]
    fn header_shapes() {
        assert_eq!(header(1, false), "x,role,nx");
        assert_eq!(header(3, true), "x,y,z,role,nx,ny,nz,u");
    }

    #[test]
    fn disc_roundtrip_is_bit_exact() {
        let d = Domain::unit_disc();
        let b = d.discretize_boundary(0.05).unwrap();
        let nodes = fill_advancing_front(&d, &b, 0.05, 5).unwrap();
        let mut buf = Vec::new();
        write_csv(&nodes, &mut buf).unwrap();
        let back = read_csv(&buf[..]).unwrap();
        assert_eq!(back.positions, nodes.positions);
        assert_eq!(back.normals, nodes.normals);
        assert_eq!(back.roles, nodes.roles);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_csv(&b"a,b,c\n"[..]).is_err());
    }

    proptest! {
        #[test]
        fn any_finite_coordinate_roundtrips(x in proptest::num::f64::NORMAL, y in -1e3f64..1e3) {
            let mut nodes = NodeSet::empty(2, 1.0, 0);
            nodes.push_interior([x, y, 0.0]);
            let mut buf = Vec::new();
            write_csv(&nodes, &mut buf).unwrap();
            let back = read_csv(&buf[..]).unwrap();
            prop_assert_eq!(back.positions[0][0].to_bits(), x.to_bits());
            prop_assert_eq!(back.positions[0][1].to_bits(), y.to_bits());
        }
    }
}
