//! The (*) scans against a brute-force search that tests every candidate
//! orbit point in a larger ball with generic geodesic projections.

use cat0_rigidity::actions::{Action, ActionSpec};
use cat0_rigidity::conditions::{check_condition_star, minimal_m_table};
use cat0_rigidity::exec::Exec;
use cat0_rigidity::groups::{ball, GroupElement, WeightAssignment};
use cat0_rigidity::num::{q, Q};
use cat0_rigidity::spaces::PieceSpec;

/// Largest `d(a·y₀, [y₀, g·y₀])` over `g` in the ball of radius `l` and `a`
/// in the ball of radius `reach` with `d(a·x₀, [x₀, g·x₀]) ≤ n`.
fn brute_m_hat(ax: &Action, ay: &Action, n: f64, l: i128, reach: i128) -> f64 {
    let fam = ax.family();
    let unit = WeightAssignment::unit(fam);
    let gs = ball(fam, &unit, &q(l));
    let cands: Vec<GroupElement> = ball(fam, &unit, &q(reach));
    let (ox, oy) = (ax.basepoint(), ay.basepoint());
    let mut worst = 0.0f64;
    for g in &gs {
        let px = ax.space().geodesic(&ox, &ax.orbit_point(g).unwrap()).unwrap();
        let py = ay.space().geodesic(&oy, &ay.orbit_point(g).unwrap()).unwrap();
        for a in &cands {
            let dx = ax.space().point_to_path(&ax.orbit_point(a).unwrap(), &px).unwrap().0;
            if dx <= n + 1e-9 {
                let dy = ay.space().point_to_path(&ay.orbit_point(a).unwrap(), &py).unwrap().0;
                worst = worst.max(dy);
            }
        }
    }
    worst
}

fn product(weights: &[(&str, i128)], shifts: &[(&str, i128)]) -> Action {
    let map = |v: &[(&str, i128)]| v.iter().map(|(k, x)| (k.to_string(), q(*x))).collect();
    Action::from_spec(&ActionSpec::Product { family: "F2xZ".into(), weights: map(weights), shifts: map(shifts) }).unwrap()
}

fn lattice(rows: [[i128; 2]; 2]) -> Action {
    Action::lattice(rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect()).unwrap()
}

fn complex(basis: [[i128; 2]; 2], interval: i128) -> Action {
    Action::from_spec(&ActionSpec::Complex {
        family: "(ZxZ)*Z2".into(),
        pieces: vec![
            PieceSpec::FlatLattice { basis: basis.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect() },
            PieceSpec::Interval { length: q(interval) },
        ],
    })
    .unwrap()
}

fn agree(ax: &Action, ay: &Action, l: u64, reach: i128) {
    let table = minimal_m_table(ax, ay, &q(1), l, Exec::Parallel).unwrap();
    let brute = brute_m_hat(ax, ay, 1.0, l as i128, reach);
    let scanned = table.rows[l as usize].m_hat_value;
    assert!((scanned - brute).abs() < 1e-9, "scan {scanned} vs brute force {brute}");
}

#[test]
fn product_scan_matches_brute_force() {
    agree(&product(&[], &[]), &product(&[], &[("b", 2)]), 3, 6);
    agree(&product(&[("a", 2)], &[]), &product(&[], &[("a", 1)]), 2, 6);
}

#[test]
fn lattice_scan_matches_brute_force() {
    agree(&lattice([[1, 0], [0, 1]]), &lattice([[1, 0], [1, 1]]), 4, 8);
    agree(&lattice([[2, 1], [0, 1]]), &lattice([[1, 0], [0, 3]]), 3, 10);
}

#[test]
fn complex_scan_matches_brute_force() {
    agree(&complex([[1, 0], [0, 1]], 1), &complex([[1, 0], [1, 1]], 2), 2, 5);
}

#[test]
fn star_witness_appears_just_below_m_hat() {
    let (ax, ay) = (product(&[], &[]), product(&[], &[("b", 2)]));
    let t = minimal_m_table(&ax, &ay, &q(1), 4, Exec::Parallel).unwrap();
    let m_hat = t.rows[4].m_hat_value;
    let below = cat0_rigidity::actions::ceil_to_grid(m_hat - 1e-3, 1000) - Q::new(1, 1000);
    let above = cat0_rigidity::actions::ceil_to_grid(m_hat, 1000);
    let fail = check_condition_star(&ax, &ay, &q(1), &below, 4, Exec::Parallel).unwrap();
    let pass = check_condition_star(&ax, &ay, &q(1), &above, 4, Exec::Parallel).unwrap();
    assert!(fail.witness.is_some() && !fail.holds);
    assert!(pass.holds, "{:?}", pass.witness);
    let w = fail.witness.unwrap();
    assert!(w.x_distance <= 1.0 + 1e-9 && w.y_distance > cat0_rigidity::num::to_f64(&below));
}

#[test]
fn sequential_and_parallel_scans_agree() {
    let (ax, ay) = (product(&[], &[]), product(&[], &[("b", 2)]));
    let s = minimal_m_table(&ax, &ay, &q(1), 5, Exec::Sequential).unwrap();
    let p = minimal_m_table(&ax, &ay, &q(1), 5, Exec::Parallel).unwrap();
    assert_eq!(s, p);
}
