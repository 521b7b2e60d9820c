use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::{IppInstance, ObsId, Prior};
use crate::metric::{metric_closure, WeightedGraph};

const MASK_8: &str = include_str!("../../data/occlusion_8.txt");
const MASK_9: &str = include_str!("../../data/occlusion_9.txt");
const MASK_10: &str = include_str!("../../data/occlusion_10.txt");

#[derive(Clone, Debug, PartialEq)]
pub struct UavConfig {
    pub n: usize,
    /// Cells whose long-range sensor sees nothing.
    pub occluded: BTreeSet<(usize, usize)>,
    pub cost_high_adjacent: f64,
    pub cost_low_adjacent: f64,
    pub cost_altitude_change: f64,
}

impl UavConfig {
    pub fn new(n: usize) -> Self {
        UavConfig {
            n,
            occluded: BTreeSet::new(),
            cost_high_adjacent: 1.0,
            cost_low_adjacent: 4.0,
            cost_altitude_change: 10.0,
        }
    }

    pub fn with_occlusions(mut self, cells: impl IntoIterator<Item = (usize, usize)>) -> Self {
        self.occluded.extend(cells);
        self
    }
}

/// Shipped occlusion pattern for `n` in {8, 9, 10}.
pub fn default_occlusion_mask(n: usize) -> Option<Vec<(usize, usize)>> {
    let text = match n {
        8 => MASK_8,
        9 => MASK_9,
        10 => MASK_10,
        _ => return None,
    };
    Some(parse_occlusions(text).expect("shipped masks parse"))
}

/// One `row col` pair per line; blank lines and `#` comments ignored.
pub fn parse_occlusions(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let cell = match f.as_slice() {
            [r, c] => r.parse().ok().zip(c.parse().ok()),
            _ => None,
        };
        out.push(cell.ok_or_else(|| Error::parse(i + 1, format!("expected `row col`, found {line:?}")))?);
    }
    Ok(out)
}

/// Victim search on an `n × n` grid at two altitudes. Scenario `i` puts the
/// victim in cell `(i / n, i % n)`.
pub fn gen_uav(cfg: &UavConfig) -> Result<IppInstance> {
    let n = cfg.n;
    if n < 2 {
        return Err(Error::Invalid("grid side must be at least 2".into()));
    }
    if let Some(&(r, c)) = cfg.occluded.iter().find(|&&(r, c)| r >= n || c >= n) {
        return Err(Error::Invalid(format!("occluded cell ({r}, {c}) outside the {n}x{n} grid")));
    }
    let mut g = WeightedGraph::new();
    g.add_node("r");
    for alt in ['L', 'H'] {
        for r in 0..n {
            for c in 0..n {
                g.add_node(format!("{alt}{r}_{c}"));
            }
        }
    }
    let low = |r: usize, c: usize| 1 + r * n + c;
    let high = |r: usize, c: usize| 1 + n * n + r * n + c;
    g.add_edge(0, low(0, 0), cfg.cost_low_adjacent)?;
    for r in 0..n {
        for c in 0..n {
            g.add_edge(low(r, c), high(r, c), cfg.cost_altitude_change)?;
            for (dr, dc) in [(0, 1), (1, 0)] {
                let (r2, c2) = (r + dr, c + dc);
                if r2 < n && c2 < n {
                    g.add_edge(low(r, c), low(r2, c2), cfg.cost_low_adjacent)?;
                    g.add_edge(high(r, c), high(r2, c2), cfg.cost_high_adjacent)?;
                }
            }
        }
    }
    let metric = Arc::new(metric_closure(&g)?);
    let locations: Vec<usize> = (1..=2 * n * n).collect();
    let (zero, one, none): (ObsId, ObsId, ObsId) = (0, 1, 2);
    let rows = (0..n * n)
        .map(|victim| {
            let (vr, vc) = (victim / n, victim % n);
            let mut row = Vec::with_capacity(2 * n * n);
            for r in 0..n {
                for c in 0..n {
                    row.push(if (r, c) == (vr, vc) { one } else { zero });
                }
            }
            for r in 0..n {
                for c in 0..n {
                    row.push(if cfg.occluded.contains(&(r, c)) {
                        none
                    } else if r.abs_diff(vr) <= 1 && c.abs_diff(vc) <= 1 {
                        one
                    } else {
                        zero
                    });
                }
            }
            row
        })
        .collect();
    let alphabet = vec!["0".to_string(), "1".to_string(), "none".to_string()];
    let inst = IppInstance::hypothesis_id(metric, locations, alphabet, rows, vec![Prior::uniform(n * n); n * n])?;
    Ok(inst.with_source_graph(Arc::new(g)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_counts() {
        let inst = gen_uav(&UavConfig::new(2)).unwrap();
        assert_eq!(inst.m(), 4);
        assert_eq!(inst.n(), 8);
        assert_eq!(inst.metric().len(), 9);
        assert_eq!(inst.target(), 3);
        inst.metric().check_triangle_inequality().unwrap();
    }

    #[test]
    fn distances_follow_costs() {
        let inst = gen_uav(&UavConfig::new(4)).unwrap();
        let m = inst.metric();
        let at = |s: &str| m.index_of(s).unwrap();
        assert_eq!(m.d(at("r"), at("L0_0")), 4.0);
        assert_eq!(m.d(at("L0_0"), at("L0_1")), 4.0);
        assert_eq!(m.d(at("H0_0"), at("H3_3")), 6.0);
        // Climbing pays off for long low-altitude moves.
        assert_eq!(m.d(at("L0_0"), at("L3_3")), 24.0);
        assert_eq!(m.d(at("r"), at("H3_3")), 20.0);
    }

    #[test]
    fn long_range_footprint_is_clipped() {
        let inst = gen_uav(&UavConfig::new(3)).unwrap();
        let m = inst.metric();
        let h00 = m.index_of("H0_0").unwrap();
        let ones: Vec<usize> = (0..9).filter(|&s| inst.obs(s, h00) == 1).collect();
        assert_eq!(ones, vec![0, 1, 3, 4]);
        let h11 = m.index_of("H1_1").unwrap();
        assert!((0..9).all(|s| inst.obs(s, h11) == 1));
    }

    #[test]
    fn full_occlusion_is_constant() {
        let cells: Vec<_> = (0..3).flat_map(|r| (0..3).map(move |c| (r, c))).collect();
        let inst = gen_uav(&UavConfig::new(3).with_occlusions(cells)).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let h = inst.metric().index_of(&format!("H{r}_{c}")).unwrap();
                assert!((0..9).all(|s| inst.obs(s, h) == 2));
            }
        }
    }

    #[test]
    fn rows_are_distinct() {
        let inst = gen_uav(
            &UavConfig::new(5)
                .with_occlusions(default_occlusion_mask(8).unwrap().into_iter().filter(|&(r, c)| r < 5 && c < 5)),
        )
        .unwrap();
        let mut rows: Vec<Vec<ObsId>> = inst.scenarios().iter().map(|s| s.obs.to_vec()).collect();
        rows.sort();
        rows.dedup();
        assert_eq!(rows.len(), 25);
    }

    #[test]
    fn shipped_masks_fit() {
        for n in [8, 9, 10] {
            let cells = default_occlusion_mask(n).unwrap();
            assert!(!cells.is_empty());
            gen_uav(&UavConfig::new(n).with_occlusions(cells)).unwrap();
        }
        assert!(default_occlusion_mask(7).is_none());
    }

    #[test]
    fn bad_mask_lines() {
        assert!(matches!(parse_occlusions("1 2\nx\n"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(parse_occlusions("# c\n\n0 1 # tail\n").unwrap(), vec![(0, 1)]);
        assert!(gen_uav(&UavConfig::new(2).with_occlusions([(2, 0)])).is_err());
    }
}
