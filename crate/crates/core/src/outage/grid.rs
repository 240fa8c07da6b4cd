//! Dense grid plus local refinement, independent of the LP lowering.
//!
//! Only the orders a region mentions are searched; the rest stay at 0, which
//! is optimal for nonnegative weights. A coarse lattice over `[0, HI]^k`
//! seeds the `TOP_K` best feasible points, and each is refined by a pattern
//! search on a shrinking lattice until the step is below `MIN_STEP`. In each
//! pattern move one coordinate is bisected to the region boundary instead of
//! being rounded to the lattice; without that the search stalls in thin
//! wedges where the improving direction is not a lattice direction.

use super::eval::RegionEvaluator;
use super::region::Objective;

pub const HI: f64 = 1.25;
pub const COARSE_STEP: f64 = 1.0 / 16.0;
pub const MIN_STEP: f64 = 1e-7;
const TOP_K: usize = 8;
/// Feasibility tolerance on a lattice point.
const FEAS_TOL: f64 = 1e-12;

pub(crate) struct GridOutcome {
    pub best: Option<(f64, [f64; 5])>,
    pub evaluations: u64,
}

struct Search<'a> {
    ev: &'a RegionEvaluator,
    obj: &'a Objective,
    active: Vec<usize>,
    evaluations: u64,
}

impl Search<'_> {
    fn feasible(&mut self, x: &[f64; 5]) -> bool {
        self.evaluations += 1;
        self.ev.contains(x, FEAS_TOL)
    }

    fn value(&mut self, x: &[f64; 5]) -> Option<f64> {
        self.feasible(x).then(|| self.obj.eval(x))
    }

    /// Visits every point of `prod_k {c_k + j h : j in -m..=m}` within
    /// `[0, HI]`, over the active coordinates except `skip`.
    fn lattice(
        &mut self,
        center: &[f64; 5],
        h: f64,
        m: i64,
        skip: Option<usize>,
        mut visit: impl FnMut(&mut Self, [f64; 5]),
    ) {
        let dims: Vec<usize> = self.active.iter().copied().filter(|&d| Some(d) != skip).collect();
        let width = (2 * m + 1) as usize;
        let total = width.pow(dims.len() as u32);
        for idx in 0..total {
            let mut x = *center;
            let mut rem = idx;
            let mut ok = true;
            for &d in &dims {
                let j = (rem % width) as i64 - m;
                rem /= width;
                let v = center[d] + j as f64 * h;
                if !(-1e-15..=HI + 1e-15).contains(&v) {
                    ok = false;
                    break;
                }
                x[d] = v.clamp(0.0, HI);
            }
            if ok {
                visit(self, x);
            }
        }
    }

    /// Smallest feasible value of coordinate `i` in `[lo, hi]` when
    /// feasibility is monotone there, otherwise some feasible boundary point;
    /// `None` if `hi` is infeasible.
    fn boundary(&mut self, mut x: [f64; 5], i: usize, lo: f64, hi: f64) -> Option<[f64; 5]> {
        x[i] = hi;
        if !self.feasible(&x) {
            return None;
        }
        let mut y = x;
        y[i] = lo;
        if self.feasible(&y) {
            return Some(y);
        }
        let (mut a, mut b) = (lo, hi);
        while b - a > MIN_STEP * 1e-3 {
            let mid = 0.5 * (a + b);
            y[i] = mid;
            if self.feasible(&y) {
                b = mid;
            } else {
                a = mid;
            }
        }
        x[i] = b;
        Some(x)
    }

    fn refine(&mut self, mut best: (f64, [f64; 5])) -> (f64, [f64; 5]) {
        let mut h = COARSE_STEP;
        let dims = self.active.clone();
        while h >= MIN_STEP {
            // one coordinate is solved to its boundary, the rest move on the
            // lattice; cycle until a full pass brings no improvement
            let mut stale = 0;
            let mut k = 0;
            let mut moves = 0;
            while stale < dims.len().max(1) && moves < 256 {
                let solved = dims.get(k % dims.len().max(1)).copied();
                k += 1;
                let center = best.1;
                let mut cand = best;
                self.lattice(&center, h, 2, solved, |s, x| {
                    let y = match solved {
                        Some(i) => {
                            // the solved coordinate may travel further than the
                            // lattice window
                            let hi = (center[i] + 2.0 * h).min(HI);
                            s.boundary(x, i, 0.0, hi)
                        }
                        None => s.feasible(&x).then_some(x),
                    };
                    if let Some(y) = y {
                        let v = s.obj.eval(&y);
                        if v < cand.0 - 1e-15 {
                            cand = (v, y);
                        }
                    }
                });
                if cand.0 < best.0 {
                    best = cand;
                    stale = 0;
                    moves += 1;
                } else {
                    stale += 1;
                }
            }
            h /= 2.0;
        }
        best
    }
}

pub(crate) fn grid_infimum(ev: &RegionEvaluator, obj: &Objective, active: Vec<usize>) -> GridOutcome {
    let mut s = Search {
        ev,
        obj,
        active,
        evaluations: 0,
    };
    let mut seeds: Vec<(f64, [f64; 5])> = Vec::new();
    let m = (HI / COARSE_STEP).round() as i64;
    // coarse lattice anchored at 0 with the same spacing as the refinement
    let corner = {
        let mut c = [0.0; 5];
        for &d in &s.active {
            c[d] = HI / 2.0;
        }
        c
    };
    let half = m / 2;
    let h = (HI / 2.0) / half as f64;
    s.lattice(&corner, h, half, None, |s, x| {
        if let Some(v) = s.value(&x) {
            seeds.push((v, x));
        }
    });
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
    seeds.truncate(TOP_K);
    let best = seeds
        .into_iter()
        .map(|seed| s.refine(seed))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    GridOutcome {
        best,
        evaluations: s.evaluations,
    }
}
