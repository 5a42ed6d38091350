//! Integer-order Bessel functions of the first kind.
//!
//! Three regimes:
//!
//! * `z < 1`: the ascending power series, which converges in a handful of
//!   terms;
//! * `n > z`: Miller's algorithm, a downward recurrence started far above `n`
//!   and normalized with `J₀ + 2 Σ J₂ₖ = 1`;
//! * `n ≤ z`: `J₀` and `J₁` from the same normalized downward sweep, then the
//!   (stable for `n ≤ z`) upward recurrence.

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 512;
pub const MAX_ARGUMENT: f64 = 1.0e4;

const RESCALE_ABOVE: f64 = 1.0e250;
const RESCALE_BY: f64 = 1.0e-250;

/// `J_order(z)` for `0 <= order <= 512`, `0 <= z <= 1e4`, to about `1e-13`
/// absolute accuracy.
pub fn bessel_j(order: u32, z: f64) -> Result<f64> {
    if order > MAX_ORDER {
        return Err(Error::OutOfRange(format!("Bessel order {order} > {MAX_ORDER}")));
    }
    if !(0.0..=MAX_ARGUMENT).contains(&z) {
        return Err(Error::OutOfRange(format!(
            "Bessel argument {z} outside [0, {MAX_ARGUMENT}]"
        )));
    }
    if z == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    if z < 1.0 {
        return Ok(series(order, z));
    }
    if f64::from(order) > z {
        return Ok(miller(order, z).order_n);
    }
    let sweep = miller(1, z);
    let (mut prev, mut cur) = (sweep.j0, sweep.j1);
    if order == 0 {
        return Ok(prev);
    }
    for k in 1..order {
        let next = 2.0 * f64::from(k) / z * cur - prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `J_order(x)`, allowing orders past the table limit when the value is far
/// below double precision anyway (`x` well under the order).
pub(crate) fn bessel_or_tail(order: usize, x: f64) -> Result<f64> {
    if order <= MAX_ORDER as usize {
        return bessel_j(order as u32, x);
    }
    if x < 0.5 * order as f64 {
        Ok(0.0)
    } else {
        Err(Error::OutOfRange(format!(
            "Bessel order {order} above {MAX_ORDER} at argument {x}"
        )))
    }
}

fn series(order: u32, z: f64) -> f64 {
    let half = z / 2.0;
    let mut lead = 1.0;
    for k in 1..=order {
        lead *= half / f64::from(k);
    }
    if lead == 0.0 {
        return 0.0;
    }
    let q = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60u32 {
        term *= q / (f64::from(k) * f64::from(k + order));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

struct Sweep {
    j0: f64,
    j1: f64,
    order_n: f64,
}

fn start_order(order: u32, z: f64) -> u32 {
    let top = f64::from(order).max(z.ceil());
    let m = (top + 20.0 + (40.0 * top).sqrt()) as u32;
    m + (m % 2)
}

fn miller(order: u32, z: f64) -> Sweep {
    let start = start_order(order, z);
    let mut above = 0.0f64;
    let mut cur = 1.0e-30f64;
    let mut norm = 0.0;
    let mut at_order = 0.0;
    let mut j1 = 0.0;
    if start == order {
        at_order = cur;
    }
    // cur holds J_k (unnormalized); produce J_{k-1}
    for k in (1..=start).rev() {
        let below = 2.0 * f64::from(k) / z * cur - above;
        above = cur;
        cur = below;
        let idx = k - 1;
        if idx == order {
            at_order = cur;
        }
        if idx == 1 {
            j1 = cur;
        }
        if idx == 0 {
            norm += cur;
        } else if idx % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            at_order *= RESCALE_BY;
            j1 *= RESCALE_BY;
        }
    }
    Sweep {
        j0: cur / norm,
        j1: j1 / norm,
        order_n: at_order / norm,
    }
}
