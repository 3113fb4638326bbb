//! Shared inputs for the benchmarks.

use ordstat::{order_stat_joint, OrderStatJoint, Population};

/// Joint law of `(X_{i:n}, X_{j:n})` under the uniform law on `{1..size}`.
pub fn uniform_joint(size: usize, i: usize, j: usize, n: usize) -> OrderStatJoint {
    order_stat_joint(&Population::uniform_grid(size).expect("size >= 1"), i, j, n)
        .expect("valid indices")
}
