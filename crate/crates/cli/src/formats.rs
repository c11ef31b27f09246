//! File formats: the line-oriented arrangement text format, the adjacency
//! graph format, and polynomial output.
//!
//! Arrangement files: a header `dim=<d> shape=<tag>[:<num>/<den>]
//! order=<tag> n=<n>`, then one line per box with `l1 u1 l2 u2 ... ld ud`.
//! Rationals are written `num/den` or as decimal literals (parsed exactly).
//! Lines starting with `#` are comments.
//!
//! Graph files: line 1 `n=<n>`, then one hexadecimal adjacency bitmask per
//! vertex.

use anyhow::{anyhow, bail, Context, Result};
use boxmis_core::geometry::{Arrangement, Box, OrderClass, ShapeClass};
use boxmis_core::graph::OrderedGraph;
use boxmis_core::poly::ExpectationPolynomial;
use boxmis_core::rat::{format_rat, parse_rat, Rat};

pub fn shape_tag(shape: &ShapeClass) -> String {
    match shape {
        ShapeClass::UnitCube => "unit".to_string(),
        ShapeClass::SigmaBoundedCube(s) => format!("sigma:{}", format_rat(s)),
        ShapeClass::UnitVolume => "unitvol".to_string(),
        ShapeClass::ArbitraryCube => "cube".to_string(),
        ShapeClass::ArbitraryRect => "rect".to_string(),
    }
}

pub fn parse_shape_tag(tag: &str) -> Result<ShapeClass> {
    if let Some(rest) = tag.strip_prefix("sigma:") {
        let sigma = parse_rat(rest).ok_or_else(|| anyhow!("bad sigma value {rest:?}"))?;
        return Ok(ShapeClass::SigmaBoundedCube(sigma));
    }
    match tag {
        "unit" => Ok(ShapeClass::UnitCube),
        "unitvol" => Ok(ShapeClass::UnitVolume),
        "cube" => Ok(ShapeClass::ArbitraryCube),
        "rect" => Ok(ShapeClass::ArbitraryRect),
        other => bail!("unknown shape tag {other:?}"),
    }
}

pub fn order_tag(order: OrderClass) -> &'static str {
    match order {
        OrderClass::Dominating => "dominating",
        OrderClass::NonDominated => "nondominated",
        OrderClass::Arbitrary => "arbitrary",
    }
}

pub fn parse_order_tag(tag: &str) -> Result<OrderClass> {
    match tag {
        "dominating" => Ok(OrderClass::Dominating),
        "nondominated" => Ok(OrderClass::NonDominated),
        "arbitrary" => Ok(OrderClass::Arbitrary),
        other => bail!("unknown order tag {other:?}"),
    }
}

pub fn parse_arrangement(text: &str) -> Result<Arrangement> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| anyhow!("missing header line"))?;
    let mut dim = None;
    let mut shape = None;
    let mut order = None;
    let mut n = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| anyhow!("bad header field {field:?}"))?;
        match key {
            "dim" => dim = Some(value.parse::<usize>().context("bad dim")?),
            "shape" => shape = Some(parse_shape_tag(value)?),
            "order" => order = Some(parse_order_tag(value)?),
            "n" => n = Some(value.parse::<usize>().context("bad n")?),
            other => bail!("unknown header key {other:?}"),
        }
    }
    let dim = dim.ok_or_else(|| anyhow!("header missing dim"))?;
    let shape = shape.ok_or_else(|| anyhow!("header missing shape"))?;
    let order = order.ok_or_else(|| anyhow!("header missing order"))?;
    let n = n.ok_or_else(|| anyhow!("header missing n"))?;
    let mut boxes = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        if i >= n {
            bail!("more than n={n} box lines");
        }
        let values: Vec<Rat> = line
            .split_whitespace()
            .map(|tok| parse_rat(tok).ok_or_else(|| anyhow!("bad rational {tok:?} on box line {i}")))
            .collect::<Result<_>>()?;
        if values.len() != 2 * dim {
            bail!("box line {i} has {} values, expected {}", values.len(), 2 * dim);
        }
        let lower: Vec<Rat> = (0..dim).map(|j| values[2 * j].clone()).collect();
        let upper: Vec<Rat> = (0..dim).map(|j| values[2 * j + 1].clone()).collect();
        boxes.push(Box::new(lower, upper).map_err(|e| anyhow!("box line {i}: {e}"))?);
    }
    if boxes.len() != n {
        bail!("expected n={n} boxes, found {}", boxes.len());
    }
    Ok(Arrangement::new(boxes, shape, order))
}

pub fn write_arrangement(arr: &Arrangement) -> String {
    let dim = arr.dim().unwrap_or(0);
    let mut out = format!(
        "dim={} shape={} order={} n={}\n",
        dim,
        shape_tag(&arr.shape),
        order_tag(arr.order),
        arr.len()
    );
    for b in &arr.boxes {
        let mut fields = Vec::with_capacity(2 * dim);
        for j in 0..dim {
            fields.push(format_rat(&b.lower()[j]));
            fields.push(format_rat(&b.upper()[j]));
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_graph(text: &str) -> Result<OrderedGraph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| anyhow!("missing graph header"))?;
    let n: usize = header
        .strip_prefix("n=")
        .ok_or_else(|| anyhow!("graph header must be n=<n>"))?
        .parse()
        .context("bad n")?;
    let mut adj = Vec::with_capacity(n);
    for line in lines {
        let mask = u64::from_str_radix(line.trim_start_matches("0x"), 16)
            .with_context(|| format!("bad adjacency mask {line:?}"))?;
        adj.push(mask);
    }
    if adj.len() != n {
        bail!("expected {n} adjacency lines, found {}", adj.len());
    }
    for (i, &m) in adj.iter().enumerate() {
        if m & (1 << i) != 0 {
            bail!("self loop at vertex {i}");
        }
        if n < 64 && m >> n != 0 {
            bail!("vertex {i} has adjacency bits beyond n");
        }
        for j in 0..n {
            if (m >> j) & 1 != (adj.get(j).map_or(0, |x| (x >> i) & 1)) && j < adj.len() {
                bail!("adjacency not symmetric between {i} and {j}");
            }
        }
    }
    Ok(OrderedGraph::from_adjacency(adj))
}

pub fn write_graph(g: &OrderedGraph) -> String {
    let mut out = format!("n={}\n", g.n());
    for v in 0..g.n() {
        out.push_str(&format!("{:x}\n", g.neighbors(v)));
    }
    out
}

/// Polynomial output: integer coefficients, constant term first.
pub fn write_polynomial(poly: &ExpectationPolynomial) -> String {
    poly.coeffs()
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use boxmis_core::rat::rat;

    #[test]
    fn arrangement_round_trip() {
        let text = "# comment\ndim=2 shape=unit order=nondominated n=3\n\
                    1.5 2.5 1.5 2.5\n2.3 3.3 0.7 1.7\n0.7 1.7 2.3 3.3\n";
        let arr = parse_arrangement(text).unwrap();
        assert_eq!(arr.len(), 3);
        assert_eq!(arr.boxes[1].lower()[0], rat(23, 10));
        assert!(arr.validate().is_ok());
        let rendered = write_arrangement(&arr);
        let back = parse_arrangement(&rendered).unwrap();
        assert_eq!(arr, back);
    }

    #[test]
    fn sigma_tag_round_trip() {
        let shape = ShapeClass::SigmaBoundedCube(rat(5, 2));
        let tag = shape_tag(&shape);
        assert_eq!(tag, "sigma:5/2");
        assert_eq!(parse_shape_tag(&tag).unwrap(), shape);
    }

    #[test]
    fn graph_round_trip() {
        let g = OrderedGraph::from_edge_mask(5, 0b1111111);
        let text = write_graph(&g);
        assert_eq!(parse_graph(&text).unwrap(), g);
        assert!(parse_graph("n=2\n1\n").is_err());
        assert!(parse_graph("n=2\n2\n1\n").is_ok());
    }
}
