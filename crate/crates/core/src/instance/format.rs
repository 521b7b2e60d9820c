//! Line-oriented text format for hypothesis-identification instances.
//!
//! ```text
//! ipp-instance 1
//! kind hypothesis-id
//! m 2
//! n 2
//! Q 1
//! root r
//! alphabet 0 1
//! points 3
//! r
//! a
//! b
//! distances            (or: graph <edge count>, then "u v length" lines)
//! 0 1 2
//! 1 0 1
//! 2 1 0
//! locations a b
//! scenarios
//! 1/2 0 0
//! 1/2 1 0
//! end
//! ```
//!
//! Scenario lines are `prior obs...` with one symbol per location in the
//! order of the `locations` line. Floats use Rust's shortest round-trip
//! representation, so write followed by read reproduces the instance exactly.
//! Lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{IppInstance, ObsId, Prior};
use crate::error::{Error, Result};
use crate::metric::{metric_closure, MetricSpace, WeightedGraph};

const MAGIC: &str = "ipp-instance";
const VERSION: u32 = 1;

pub fn write_instance(inst: &IppInstance) -> Result<String> {
    if !inst.is_hypothesis_id() {
        return Err(Error::Invalid("only hypothesis-identification instances can be serialized".into()));
    }
    let metric = inst.metric();
    for l in metric.labels().iter().chain(inst.alphabet()) {
        if l.is_empty() || l.chars().any(char::is_whitespace) {
            return Err(Error::Invalid(format!("label `{l}` is empty or contains whitespace")));
        }
    }
    let mut out = String::new();
    let w = &mut out;
    writeln!(w, "{MAGIC} {VERSION}").unwrap();
    writeln!(w, "kind hypothesis-id").unwrap();
    writeln!(w, "m {}", inst.m()).unwrap();
    writeln!(w, "n {}", inst.n()).unwrap();
    writeln!(w, "Q {}", inst.target()).unwrap();
    writeln!(w, "root {}", metric.label(metric.root())).unwrap();
    writeln!(w, "alphabet {}", inst.alphabet().join(" ")).unwrap();
    writeln!(w, "points {}", metric.len()).unwrap();
    for l in metric.labels() {
        writeln!(w, "{l}").unwrap();
    }
    match inst.source_graph() {
        Some(g) => {
            writeln!(w, "graph {}", g.edge_count()).unwrap();
            for &(u, v, len) in g.edges() {
                writeln!(w, "{} {} {len}", g.node_ids()[u], g.node_ids()[v]).unwrap();
            }
        }
        None => {
            writeln!(w, "distances").unwrap();
            for u in 0..metric.len() {
                let row: Vec<String> = (0..metric.len()).map(|v| metric.d(u, v).to_string()).collect();
                writeln!(w, "{}", row.join(" ")).unwrap();
            }
        }
    }
    let locs: Vec<&str> = inst.locations().iter().map(|&v| metric.label(v)).collect();
    writeln!(w, "locations {}", locs.join(" ")).unwrap();
    writeln!(w, "scenarios").unwrap();
    for (i, s) in inst.scenarios().iter().enumerate() {
        write!(w, "{}", s.prior).unwrap();
        for &v in inst.locations() {
            write!(w, " {}", inst.alphabet()[inst.obs(i, v) as usize]).unwrap();
        }
        writeln!(w).unwrap();
    }
    writeln!(w, "end").unwrap();
    Ok(out)
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            self.last = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok((i + 1, line));
        }
        Err(Error::parse(self.last + 1, "unexpected end of input"))
    }

    /// Reads `key value...` and returns the remainder after the key.
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (no, line) = self.next()?;
        let mut it = line.splitn(2, char::is_whitespace);
        if it.next() != Some(key) {
            return Err(Error::parse(no, format!("expected `{key}`")));
        }
        Ok((no, it.next().unwrap_or("").trim()))
    }

    fn keyed_num<T: std::str::FromStr>(&mut self, key: &str) -> Result<(usize, T)> {
        let (no, rest) = self.keyed(key)?;
        let v = rest.parse().map_err(|_| Error::parse(no, format!("`{key}` needs a number, got `{rest}`")))?;
        Ok((no, v))
    }
}

fn parse_f64(no: usize, s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::parse(no, format!("bad number `{s}`")))
}

fn parse_prior(no: usize, s: &str) -> Result<Prior> {
    if let Some((a, b)) = s.split_once('/') {
        let num = a.parse().map_err(|_| Error::parse(no, format!("bad prior `{s}`")))?;
        let den: u64 = b.parse().map_err(|_| Error::parse(no, format!("bad prior `{s}`")))?;
        if den == 0 {
            return Err(Error::parse(no, "prior with zero denominator"));
        }
        Ok(Prior::Ratio { num, den })
    } else {
        Ok(Prior::Real(parse_f64(no, s)?))
    }
}

pub fn read_instance(text: &str) -> Result<IppInstance> {
    let mut lines = Lines { inner: text.lines().enumerate().peekable(), last: 0 };
    let (no, version) = lines.keyed_num::<u32>(MAGIC)?;
    if version != VERSION {
        return Err(Error::parse(no, format!("unsupported format version {version}")));
    }
    let (no, kind) = lines.keyed("kind")?;
    if kind != "hypothesis-id" {
        return Err(Error::parse(no, format!("unsupported kind `{kind}`")));
    }
    let (m_line, m) = lines.keyed_num::<usize>("m")?;
    let (n_line, n) = lines.keyed_num::<usize>("n")?;
    let (q_line, q) = lines.keyed_num::<u64>("Q")?;
    let (root_line, root) = lines.keyed("root")?;
    let (_, alphabet) = lines.keyed("alphabet")?;
    let alphabet: Vec<String> = alphabet.split_whitespace().map(String::from).collect();
    let (_, npts) = lines.keyed_num::<usize>("points")?;
    let mut labels = Vec::with_capacity(npts);
    for _ in 0..npts {
        labels.push(lines.next()?.1.to_string());
    }

    let (no, section) = lines.next()?;
    let mut graph = None;
    let metric = if section == "distances" {
        let mut dist = Vec::with_capacity(npts * npts);
        for _ in 0..npts {
            let (no, row) = lines.next()?;
            let before = dist.len();
            for tok in row.split_whitespace() {
                dist.push(parse_f64(no, tok)?);
            }
            if dist.len() - before != npts {
                return Err(Error::parse(no, format!("distance row needs {npts} entries")));
            }
        }
        let root_idx = labels
            .iter()
            .position(|l| l == root)
            .ok_or_else(|| Error::parse(root_line, format!("unknown root `{root}`")))?;
        MetricSpace::from_matrix(labels, dist, root_idx)?
    } else if let Some(count) = section.strip_prefix("graph") {
        let count: usize = count.trim().parse().map_err(|_| Error::parse(no, "`graph` needs an edge count"))?;
        let mut g = WeightedGraph::new();
        for l in &labels {
            g.add_node(l.clone());
        }
        for _ in 0..count {
            let (no, line) = lines.next()?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::parse(no, "edge lines are `u v length`"));
            }
            g.add_edge_by_id(toks[0], toks[1], parse_f64(no, toks[2])?).map_err(|e| Error::parse(no, e.to_string()))?;
        }
        if g.node_count() != npts {
            return Err(Error::parse(no, "duplicate point labels"));
        }
        let closed = metric_closure(&g)?;
        let root_idx = closed.index_of(root).map_err(|_| Error::parse(root_line, format!("unknown root `{root}`")))?;
        graph = Some(Arc::new(g));
        closed.with_root(root_idx)?
    } else {
        return Err(Error::parse(no, "expected `distances` or `graph`"));
    };

    let (loc_line, locs) = lines.keyed("locations")?;
    let locations = locs
        .split_whitespace()
        .map(|l| metric.index_of(l).map_err(|_| Error::parse(loc_line, format!("unknown location `{l}`"))))
        .collect::<Result<Vec<_>>>()?;
    if locations.len() != n {
        return Err(Error::parse(n_line, format!("n = {n} but {} locations listed", locations.len())));
    }
    lines.keyed("scenarios")?;
    let mut rows = Vec::with_capacity(m);
    let mut priors = Vec::with_capacity(m);
    loop {
        let (no, line) = lines.next()?;
        if line == "end" {
            break;
        }
        let mut toks = line.split_whitespace();
        priors.push(parse_prior(no, toks.next().unwrap())?);
        let row = toks
            .map(|t| {
                alphabet
                    .iter()
                    .position(|a| a == t)
                    .map(|i| i as ObsId)
                    .ok_or_else(|| Error::parse(no, format!("unknown symbol `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(Error::parse(no, format!("scenario row needs {n} observations")));
        }
        rows.push(row);
    }
    if rows.len() != m {
        return Err(Error::parse(m_line, format!("m = {m} but {} scenario rows", rows.len())));
    }
    if m == 0 || q != m as u64 - 1 {
        return Err(Error::parse(q_line, "hypothesis identification needs Q = m - 1"));
    }
    let inst = IppInstance::hypothesis_id(Arc::new(metric), locations, alphabet, rows, priors)?;
    Ok(match graph {
        Some(g) => inst.with_source_graph(g),
        None => inst,
    })
}
