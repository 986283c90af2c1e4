//! Reference systems used throughout the tests and shipped as data files.
//!
//! * `s1`: `Z/3` shifting 3 points, scalar fibers. Free and transitive.
//! * `s2`: `Z/2` on a single point. Every `U_g` is the identity.
//! * `s3`: `Z/2` swapping points 0 and 1 and fixing 2, trivial cocycle.
//! * `s3_twisted`: as `s3` with `V_g(2) = −1`.
//! * `s4`: `Z/2` swapping 2 points that form a single central block.
//! * `s5`: `Z/4` shifting 4 points with 2×2 fibers and a cocycle
//!   `V_{g^k}(x) = W(x)·R^k·W(x − k)*` built from a quarter rotation `R`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{validate, DynSystem, FiniteGroup, RawSystem};
use crate::linalg::{CMatrix, Tolerances, C64};

fn shift(n: usize) -> RawSystem {
    RawSystem {
        cayley: FiniteGroup::cyclic(n).cayley_table(),
        points: n,
        sigma: (0..n).map(|k| (0..n).map(|x| (x + k) % n).collect()).collect(),
        fiber_dim: 1,
        cocycle: None,
        z_partition: None,
        tolerances: Tolerances::default(),
    }
}

fn swap_fixing_two(v2: f64) -> RawSystem {
    let scalar = |c: f64| CMatrix::from_real(&[&[c]]);
    RawSystem {
        cayley: FiniteGroup::cyclic(2).cayley_table(),
        points: 3,
        sigma: vec![vec![0, 1, 2], vec![1, 0, 2]],
        fiber_dim: 1,
        cocycle: Some(vec![
            vec![scalar(1.0); 3],
            vec![scalar(1.0), scalar(1.0), scalar(v2)],
        ]),
        z_partition: None,
        tolerances: Tolerances::default(),
    }
}

pub fn s1_raw() -> RawSystem {
    shift(3)
}

pub fn s2_raw() -> RawSystem {
    RawSystem {
        cayley: FiniteGroup::cyclic(2).cayley_table(),
        points: 1,
        sigma: vec![vec![0], vec![0]],
        fiber_dim: 1,
        cocycle: None,
        z_partition: None,
        tolerances: Tolerances::default(),
    }
}

pub fn s3_raw() -> RawSystem {
    swap_fixing_two(1.0)
}

pub fn s3_twisted_raw() -> RawSystem {
    swap_fixing_two(-1.0)
}

pub fn s4_raw() -> RawSystem {
    RawSystem {
        z_partition: Some(vec![vec![0, 1]]),
        ..shift(2)
    }
}

pub fn s5_raw() -> RawSystem {
    let n = 4;
    let r = CMatrix::from_real(&[&[0.0, -1.0], &[1.0, 0.0]]);
    let w = |x: usize| {
        if x.is_multiple_of(2) {
            CMatrix::identity(2)
        } else {
            CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)])
        }
    };
    let mut r_pow = vec![CMatrix::identity(2)];
    for k in 1..n {
        r_pow.push(&r_pow[k - 1] * &r);
    }
    let cocycle = (0..n)
        .map(|k| {
            (0..n)
                .map(|x| &(&w(x) * &r_pow[k]) * &w((x + n - k) % n).adjoint())
                .collect()
        })
        .collect();
    RawSystem {
        fiber_dim: 2,
        cocycle: Some(cocycle),
        ..shift(n)
    }
}

fn checked(raw: RawSystem) -> DynSystem {
    validate(raw).expect("reference fixture is valid")
}

pub fn s1() -> DynSystem {
    checked(s1_raw())
}

pub fn s2() -> DynSystem {
    checked(s2_raw())
}

pub fn s3() -> DynSystem {
    checked(s3_raw())
}

pub fn s3_twisted() -> DynSystem {
    checked(s3_twisted_raw())
}

pub fn s4() -> DynSystem {
    checked(s4_raw())
}

pub fn s5() -> DynSystem {
    checked(s5_raw())
}

/// Every reference system with its short name.
pub fn all() -> Vec<(&'static str, DynSystem)> {
    vec![
        ("s1", s1()),
        ("s2", s2()),
        ("s3", s3()),
        ("s3_twisted", s3_twisted()),
        ("s4", s4()),
        ("s5", s5()),
    ]
}
