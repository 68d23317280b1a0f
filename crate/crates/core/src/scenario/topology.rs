use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::seed::{stream_rng, Stream};
use crate::deployment::{clustered_baseline, Partition};

pub type Point = [f64; 3];

/// How O-RU positions were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    Grid { rows: usize, cols: usize },
    /// `num_oru` has no near-square factorisation; positions drawn uniformly.
    RandomFallback,
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub oru_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// K x L, 3-D UE to O-RU distance in metres.
    pub ue_oru_distance: DMatrix<f64>,
    /// L x L, O-RU to O-RU distance in metres.
    pub oru_distance: DMatrix<f64>,
    pub partition: Partition,
    pub placement: Placement,
}

impl Topology {
    pub fn num_oru(&self) -> usize {
        self.oru_positions.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ue_positions.len()
    }

    /// Builds a topology from explicit positions. The partition starts as the
    /// clustered baseline over `num_edu` groups.
    pub fn from_positions(
        oru_positions: Vec<Point>,
        ue_positions: Vec<Point>,
        num_edu: usize,
        placement: Placement,
        cluster_seed: u64,
    ) -> crate::Result<Self> {
        let ue_oru_distance = DMatrix::from_fn(ue_positions.len(), oru_positions.len(), |k, l| {
            distance(&ue_positions[k], &oru_positions[l])
        });
        let oru_distance = pairwise(&oru_positions);
        let partition = clustered_baseline(&oru_positions, num_edu, cluster_seed)?;
        Ok(Self {
            oru_positions,
            ue_positions,
            ue_oru_distance,
            oru_distance,
            partition,
            placement,
        })
    }
}

pub(crate) fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

pub(crate) fn pairwise(points: &[Point]) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), points.len(), |p, q| distance(&points[p], &points[q]))
}

/// Most-square `rows x cols = n` factorisation, accepted when the aspect ratio is at most 2.
pub fn grid_shape(n: usize) -> Option<(usize, usize)> {
    if n == 0 {
        return None;
    }
    let mut rows = (n as f64).sqrt().floor() as usize;
    while rows > 1 && !n.is_multiple_of(rows) {
        rows -= 1;
    }
    let cols = n / rows;
    (cols <= 2 * rows).then_some((rows, cols))
}

/// Places O-RUs on a centred grid (or uniformly at random when no grid fits)
/// and drops UEs uniformly over the square area.
pub fn build_topology(config: &ScenarioConfig, drop_index: u64) -> crate::Result<Topology> {
    let side = config.area_side_m;
    let h = config.antenna_height_m;
    let (oru_positions, placement) = match grid_shape(config.num_oru) {
        Some((rows, cols)) => {
            let dx = side / cols as f64;
            let dy = side / rows as f64;
            let pts = (0..rows)
                .flat_map(|r| {
                    (0..cols).map(move |c| [(c as f64 + 0.5) * dx, (r as f64 + 0.5) * dy, h])
                })
                .collect();
            (pts, Placement::Grid { rows, cols })
        }
        None => {
            let mut rng = stream_rng(config.master_seed, drop_index, Stream::OruPlacement);
            let pts = (0..config.num_oru)
                .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side, h])
                .collect();
            (pts, Placement::RandomFallback)
        }
    };

    let mut rng = stream_rng(config.master_seed, drop_index, Stream::UePositions);
    let ue_positions = (0..config.num_ue)
        .map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side, 0.0])
        .collect();

    Topology::from_positions(
        oru_positions,
        ue_positions,
        config.num_edu,
        placement,
        config.master_seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_geometry() {
        let cfg = ScenarioConfig::default();
        let topo = build_topology(&cfg, 0).unwrap();
        assert_eq!(topo.placement, Placement::Grid { rows: 10, cols: 10 });
        assert_eq!(topo.oru_positions[0], [10.0, 10.0, 10.0]);
        assert_eq!(topo.oru_positions[99], [190.0, 190.0, 10.0]);
        let mut min = f64::INFINITY;
        for p in 0..100 {
            for q in 0..100 {
                if p != q {
                    min = min.min(topo.oru_distance[(p, q)]);
                }
            }
        }
        assert!((min - 20.0).abs() < 1e-12);
    }

    #[test]
    fn ue_positions_deterministic_per_drop() {
        let cfg = ScenarioConfig::desk();
        let a = build_topology(&cfg, 5).unwrap();
        let b = build_topology(&cfg, 5).unwrap();
        let c = build_topology(&cfg, 6).unwrap();
        assert_eq!(a.ue_positions, b.ue_positions);
        assert_ne!(a.ue_positions, c.ue_positions);
    }

    #[test]
    fn ue_under_oru_sees_antenna_height() {
        let topo = Topology::from_positions(
            vec![[5.0, 5.0, 10.0], [50.0, 5.0, 10.0]],
            vec![[5.0, 5.0, 0.0]],
            1,
            Placement::Grid { rows: 1, cols: 2 },
            0,
        )
        .unwrap();
        assert_eq!(topo.ue_oru_distance[(0, 0)], 10.0);
        assert!(topo.ue_oru_distance.iter().all(|&d| d >= 10.0));
    }

    #[test]
    fn prime_oru_count_falls_back_to_random() {
        assert_eq!(grid_shape(16), Some((4, 4)));
        assert_eq!(grid_shape(8), Some((2, 4)));
        assert_eq!(grid_shape(7), None);
        let cfg = ScenarioConfig {
            num_oru: 7,
            num_edu: 2,
            ..ScenarioConfig::desk()
        };
        let topo = build_topology(&cfg, 0).unwrap();
        assert_eq!(topo.placement, Placement::RandomFallback);
        assert_eq!(topo.num_oru(), 7);
        assert!(topo.partition.satisfies_balance(2));
    }
}
