// SPDX-License-Identifier: Apache-2.0
use std::cmp::Ordering;

use serde::Serialize;

/// Where a design point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub round: usize,
    pub sweep_step: usize,
    /// Index into the flow's list of mapping solutions.
    pub solution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignPoint {
    pub throughput: f64,
    /// Exact throughput is `period_iterations / period_time`.
    pub period_time: u64,
    pub period_iterations: u64,
    pub total_buffer: u64,
    pub provenance: Provenance,
}

impl DesignPoint {
    fn cmp_throughput(&self, other: &DesignPoint) -> Ordering {
        let a = self.period_iterations as u128 * other.period_time as u128;
        let b = other.period_iterations as u128 * self.period_time as u128;
        a.cmp(&b)
    }

    /// At least as good on both axes and better on one.
    pub fn dominates(&self, other: &DesignPoint) -> bool {
        let t = self.cmp_throughput(other);
        let b = self.total_buffer.cmp(&other.total_buffer);
        t != Ordering::Less && b != Ordering::Greater && (t == Ordering::Greater || b == Ordering::Less)
    }

    fn same_objectives(&self, other: &DesignPoint) -> bool {
        self.cmp_throughput(other) == Ordering::Equal && self.total_buffer == other.total_buffer
    }
}

/// Mutually non-dominated design points, by ascending buffer size.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParetoFront {
    pub points: Vec<DesignPoint>,
}

impl ParetoFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every point of `other` is dominated by or equal to one of ours.
    pub fn weakly_dominates(&self, other: &ParetoFront) -> bool {
        other.points.iter().all(|q| {
            self.points
                .iter()
                .any(|p| p.dominates(q) || p.same_objectives(q))
        })
    }
}

/// Keep the points no other point dominates. Among points equal on both
/// objectives, the first one in input order survives.
pub fn pareto_filter(points: &[DesignPoint]) -> ParetoFront {
    let mut order: Vec<usize> = (0..points.len()).collect();
    // ascending buffer, then descending throughput, then input order
    order.sort_by(|&a, &b| {
        let (p, q) = (&points[a], &points[b]);
        p.total_buffer
            .cmp(&q.total_buffer)
            .then(q.cmp_throughput(p))
            .then(a.cmp(&b))
    });
    let mut kept: Vec<DesignPoint> = Vec::new();
    for i in order {
        let p = &points[i];
        // the best throughput so far belongs to the last kept point
        match kept.last() {
            Some(last) if last.cmp_throughput(p) != Ordering::Less => {}
            _ => kept.push(p.clone()),
        }
    }
    ParetoFront { points: kept }
}

/// Smallest-buffer point reaching `fraction` of the front's best
/// throughput; the first such point on ties.
pub fn min_buffer_for_throughput(front: &ParetoFront, fraction: f64) -> Option<&DesignPoint> {
    let best = front
        .points
        .iter()
        .map(|p| p.throughput)
        .fold(f64::NEG_INFINITY, f64::max);
    let target = fraction * best;
    front
        .points
        .iter()
        .filter(|p| p.throughput >= target)
        .min_by_key(|p| p.total_buffer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(iterations: u64, time: u64, buf: u64, tag: usize) -> DesignPoint {
        DesignPoint {
            throughput: iterations as f64 / time as f64,
            period_time: time,
            period_iterations: iterations,
            total_buffer: buf,
            provenance: Provenance {
                round: tag,
                sweep_step: 0,
                solution: tag,
            },
        }
    }

    #[test]
    fn incomparable_points_survive() {
        let f = pareto_filter(&[pt(2, 1, 20, 0), pt(1, 1, 10, 1)]);
        assert_eq!(f.len(), 2);
        assert_eq!(f.points[0].total_buffer, 10);
    }

    #[test]
    fn faster_and_smaller_dominates() {
        let f = pareto_filter(&[pt(2, 1, 10, 0), pt(1, 1, 20, 1)]);
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn dominated_point_dropped() {
        let f = pareto_filter(&[pt(2, 1, 10, 0), pt(1, 1, 10, 1)]);
        assert_eq!(f.len(), 1);
        assert_eq!(f.points[0].provenance.round, 0);
    }

    #[test]
    fn exact_tie_keeps_first() {
        let f = pareto_filter(&[pt(1, 2, 5, 0), pt(2, 4, 5, 1)]);
        assert_eq!(f.len(), 1);
        assert_eq!(f.points[0].provenance.round, 0);
    }

    #[test]
    fn min_buffer_queries() {
        let f = pareto_filter(&[pt(1, 4, 3, 0), pt(1, 2, 6, 1), pt(1, 1, 12, 2)]);
        assert_eq!(min_buffer_for_throughput(&f, 1.0).unwrap().total_buffer, 12);
        assert_eq!(min_buffer_for_throughput(&f, 0.5).unwrap().total_buffer, 6);
        assert_eq!(min_buffer_for_throughput(&f, 0.1).unwrap().total_buffer, 3);
        assert!(min_buffer_for_throughput(&ParetoFront::default(), 1.0).is_none());
    }
}
