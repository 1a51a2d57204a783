//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use hardy_ns::hardy::{
    best_nonlocal_vertex, compute_pn, evaluate_pp, max_success_lhv, max_success_ns,
    ArgumentKind, HardyArgument, OptimizationReport, PpOutcome, RelabelSearch, Relabeling,
};
use hardy_ns::lp;
use hardy_ns::nosignaling::{is_valid_box, polytope_dimension, ConstraintSystem, JointBox, Scenario};
use hardy_ns::rational::{format, int, ratio, Rational};
use hardy_ns::vertices::{
    affine_dimension, all_strategies, convex_decomposition, deterministic_box, embed,
    enumerate_vertices, pr_box, VertexKind, VertexLabel,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sym(d: usize) -> Scenario {
    Scenario::symmetric(d).unwrap()
}

/// Checks that a report's witness is a valid box attaining the optimum and
/// that no feasible point beats the optimum by a small margin.
fn certify(rep: &OptimizationReport) -> Result<(), String> {
    let v = is_valid_box(&rep.witness);
    ensure(v.is_valid(), || format!("witness invalid: {:?}", v.violations.first()))?;
    let pp = evaluate_pp(&rep.witness, &rep.argument).map_err(|e| e.to_string())?;
    ensure(pp == PpOutcome::Satisfied(rep.optimum.clone()), || {
        format!("witness PP {pp:?} != optimum {}", format(&rep.optimum))
    })?;
    // re-solve with success >= optimum + 1/1000: must be infeasible
    let arg = &rep.argument;
    let s = arg.scenario;
    let ev = arg.events();
    let indicator = |set: &[hardy_ns::nosignaling::Coord]| {
        let mut row = vec![int(0); s.num_coords()];
        for c in set {
            row[s.index(*c)] = int(1);
        }
        row
    };
    let mut lp = ConstraintSystem::polytope(s).to_lp();
    lp.add_eq(indicator(&ev.zero[0]), int(0));
    lp.add_eq(indicator(&ev.zero[1]), int(0));
    lp.add_le(indicator(&ev.zero[2]), arg.last_condition_bound.clone());
    lp.add_ge(indicator(&ev.success), &rep.optimum + ratio(1, 1000));
    ensure(!lp::check_feasible(&lp).map_err(|e| e.to_string())?, || {
        "optimum + 1/1000 still feasible".into()
    })
}

fn ac1_conventional_ns() -> Outcome {
    let mut witnesses = 0;
    for da in 2..=5 {
        for db in 2..=5 {
            let s = Scenario::parties(da, db).unwrap();
            let rep = max_success_ns(&HardyArgument::conventional(s)).map_err(|e| e.to_string())?;
            ensure(rep.optimum == ratio(1, 2), || {
                format!("{s}: optimum {}", format(&rep.optimum))
            })?;
            certify(&rep)?;
            witnesses += 1;
        }
    }
    // per-input asymmetric samples
    for dims in [[2, 3, 2, 3], [3, 2, 5, 4], [5, 4, 3, 2], [2, 5, 4, 3]] {
        let s = Scenario::from_dims(dims).unwrap();
        let rep = max_success_ns(&HardyArgument::conventional(s)).map_err(|e| e.to_string())?;
        ensure(rep.optimum == ratio(1, 2), || {
            format!("{s}: optimum {}", format(&rep.optimum))
        })?;
        certify(&rep)?;
        witnesses += 1;
    }
    Ok(format!("{witnesses} scenarios, every optimum exactly 1/2"))
}

fn ac2_relaxed_ns() -> Outcome {
    let mut cases: Vec<Scenario> = (2..=6).map(sym).collect();
    for (da, db) in [(3, 5), (2, 5), (4, 6)] {
        cases.push(Scenario::parties(da, db).unwrap());
    }
    let mut seen = Vec::new();
    for s in cases {
        let m = s.min_dim() as i64;
        let rep = max_success_ns(&HardyArgument::relaxed(s)).map_err(|e| e.to_string())?;
        ensure(rep.optimum == ratio(m - 1, m), || {
            format!("{s}: optimum {} != {}/{}", format(&rep.optimum), m - 1, m)
        })?;
        certify(&rep)?;
        seen.push(format!("{s}={}", format(&rep.optimum)));
    }
    Ok(seen.join(" "))
}

/// Independent of the event-set code: the conditions are written out
/// directly on the four outputs of a deterministic strategy.
fn lhv_oracle(kind: ArgumentKind, d: usize) -> usize {
    let mut best = 0;
    let last = d - 1;
    for a0 in 0..d {
        for a1 in 0..d {
            for b0 in 0..d {
                for b1 in 0..d {
                    let (zeros, success) = match kind {
                        ArgumentKind::Relaxed => (
                            a1 >= b0 && b1 >= a1 && a0 >= b1,
                            a0 < b0,
                        ),
                        ArgumentKind::Conventional => (
                            !(a1 != 0 && b0 == last) && !(a0 == 0 && b1 != last) && !(a1 == 0 && b1 == last),
                            a0 == 0 && b0 == last,
                        ),
                    };
                    if zeros && success {
                        best = 1;
                    }
                }
            }
        }
    }
    best
}

fn ac3_lhv_nullity() -> Outcome {
    for kind in [ArgumentKind::Conventional, ArgumentKind::Relaxed] {
        for d in 2..=4 {
            let s = sym(d);
            let arg = HardyArgument::new(kind, s, int(0), Relabeling::identity(s)).unwrap();
            let rep = max_success_lhv(&arg).map_err(|e| e.to_string())?;
            ensure(rep.optimum == int(0), || format!("{kind} d={d}: {}", format(&rep.optimum)))?;
            ensure(lhv_oracle(kind, d) == 0, || format!("{kind} d={d}: oracle found success"))?;
            ensure(is_valid_box(&rep.witness).is_valid(), || "LHV witness invalid".into())?;
        }
    }
    Ok("both kinds, d=2..4: optimum 0 by enumeration and by direct oracle".into())
}

fn ac4_pr_anchors() -> Outcome {
    let pr = pr_box();
    let s = sym(2);
    // Bob relabels both outcomes so that PR meets the conventional conditions
    let r = Relabeling::identity(s)
        .with_bob(0, vec![1, 0])
        .with_bob(1, vec![1, 0]);
    let arg = HardyArgument::new(ArgumentKind::Conventional, s, int(0), r).unwrap();
    let pp = evaluate_pp(&pr, &arg).map_err(|e| e.to_string())?;
    ensure(pp == PpOutcome::Satisfied(ratio(1, 2)), || format!("PP = {pp:?}"))?;
    for search in [RelabelSearch::Cyclic, RelabelSearch::Exhaustive] {
        let pn = compute_pn(&pr, &arg, search).map_err(|e| e.to_string())?;
        ensure(pn.pn == int(1), || format!("PN = {} ({search:?})", format(&pn.pn)))?;
    }
    Ok("PP = 1/2, PN = 1".into())
}

fn attaining_vertex(d: usize) -> Result<(JointBox, Rational), String> {
    let arg = HardyArgument::relaxed(sym(d));
    let (_, v, pp) = best_nonlocal_vertex(&arg)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("d={d}: no nonlocal vertex meets the relaxed conditions"))?;
    Ok((v, pp))
}

fn ac5_vertex_attainment() -> Outcome {
    let mut out = Vec::new();
    for d in 2..=6 {
        let (_, pp) = attaining_vertex(d)?;
        let lp = max_success_ns(&HardyArgument::relaxed(sym(d)))
            .map_err(|e| e.to_string())?
            .optimum;
        let di = d as i64;
        ensure(pp == ratio(di - 1, di), || format!("d={d}: vertex PP {}", format(&pp)))?;
        ensure(pp == lp, || format!("d={d}: vertex PP != LP optimum {}", format(&lp)))?;
        out.push(format!("d={d}:{}", format(&pp)));
    }
    Ok(out.join(" "))
}

fn ac6_ppc_trend() -> Outcome {
    let mut prev: Option<Rational> = None;
    let mut out = Vec::new();
    for d in 2..=6 {
        let (v, _) = attaining_vertex(d)?;
        let search = if d <= 4 {
            RelabelSearch::Exhaustive
        } else {
            RelabelSearch::Cyclic
        };
        let rep = compute_pn(&v, &HardyArgument::relaxed(sym(d)), search).map_err(|e| e.to_string())?;
        let di = d as i64;
        ensure(rep.pn == int(1), || format!("d={d}: PN {}", format(&rep.pn)))?;
        let ppc = rep.ppc();
        ensure(ppc == ratio(1, di), || format!("d={d}: PPC {}", format(&ppc)))?;
        if let Some(p) = &prev {
            ensure(ppc < *p, || format!("d={d}: PPC not decreasing"))?;
        }
        out.push(format!("d={d}:{}", format(&ppc)));
        prev = Some(ppc);
    }
    Ok(format!("PN = 1, PPC {}", out.join(" ")))
}

fn ac7_geometry() -> Outcome {
    ensure(polytope_dimension(sym(2)) == 8, || "dim d=2".into())?;
    ensure(polytope_dimension(sym(3)) == 24, || "dim d=3".into())?;
    let all = enumerate_vertices(sym(2), VertexKind::All);
    let boxes: Vec<JointBox> = all.iter().map(|v| v.table.clone()).collect();
    let rank = affine_dimension(&boxes);
    ensure(rank == 8, || format!("affine rank {rank}"))?;
    let mut checked = 0;
    for (i, v) in all.iter().enumerate() {
        if !matches!(v.label, VertexLabel::Nonlocal(_)) {
            continue;
        }
        let others: Vec<JointBox> = boxes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, b)| b.clone())
            .collect();
        let dec = convex_decomposition(&v.table, &others).map_err(|e| e.to_string())?;
        ensure(dec.is_none(), || format!("{:?} decomposes over the other 23", v.label))?;
        checked += 1;
    }
    ensure(checked == 8, || format!("{checked} nonlocal vertices checked"))?;
    Ok("dim 8 / 24, affine rank 8, 8 nonlocal vertices extremal".into())
}

fn ac8_validity() -> Outcome {
    let mut count = 0;
    let mut check = |b: &JointBox, what: &str| -> Result<(), String> {
        let r = is_valid_box(b);
        count += 1;
        ensure(r.is_valid(), || format!("{what}: {}", r.violations[0]))
    };
    let scenarios = [
        sym(2),
        sym(3),
        sym(4),
        Scenario::from_dims([2, 3, 2, 3]).unwrap(),
        Scenario::parties(3, 5).unwrap(),
    ];
    for s in scenarios {
        for v in enumerate_vertices(s, VertexKind::All) {
            check(&v.table, &format!("{s} {:?}", v.label))?;
        }
        for st in all_strategies(s).into_iter().take(64) {
            check(&deterministic_box(s, st), "deterministic")?;
        }
        check(&JointBox::uniform(s), "uniform")?;
        for kind in [ArgumentKind::Conventional, ArgumentKind::Relaxed] {
            let arg = HardyArgument::new(kind, s, int(0), Relabeling::identity(s)).unwrap();
            check(&max_success_ns(&arg).map_err(|e| e.to_string())?.witness, "NS witness")?;
            check(&max_success_lhv(&arg).map_err(|e| e.to_string())?.witness, "LHV witness")?;
        }
    }
    check(&embed(&pr_box(), sym(4)).map_err(|e| e.to_string())?, "embedded PR")?;
    // d=2 witnesses decompose over the 24 closed-form vertices
    let verts: Vec<JointBox> = enumerate_vertices(sym(2), VertexKind::All)
        .into_iter()
        .map(|v| v.table)
        .collect();
    for arg in [HardyArgument::conventional(sym(2)), HardyArgument::relaxed(sym(2))] {
        let w = max_success_ns(&arg).map_err(|e| e.to_string())?.witness;
        let dec = convex_decomposition(&w, &verts).map_err(|e| e.to_string())?;
        ensure(dec.is_some(), || "d=2 witness not in the hull of the 24 vertices".into())?;
    }
    Ok(format!("{count} boxes pass positivity, normalization and no-signaling exactly"))
}

fn ac9_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("sweep{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_hardy-ns"))
            .args(["sweep", "--d-min", "2", "--d-max", "10", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("sweep exited with {status}"))?;
        outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], || "sweep outputs differ".into())?;
    let text = String::from_utf8(outputs[0].clone()).map_err(|e| e.to_string())?;
    ensure(text.lines().count() == 10, || "expected header + 9 rows".into())?;
    Ok(format!("{} identical bytes", outputs[0].len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("AC1 conventional NS optimum = 1/2", ac1_conventional_ns, Some(Duration::from_secs(10))),
        ("AC2 relaxed NS optimum = (m-1)/m", ac2_relaxed_ns, Some(Duration::from_secs(30))),
        ("AC3 LHV nullity", ac3_lhv_nullity, None),
        ("AC4 PR-box anchors", ac4_pr_anchors, None),
        ("AC5 vertex attainment", ac5_vertex_attainment, None),
        ("AC6 PPC trend", ac6_ppc_trend, None),
        ("AC7 polytope geometry", ac7_geometry, None),
        ("AC8 validity suite", ac8_validity, None),
        ("AC9 sweep determinism", ac9_determinism, None),
    ];
    let mut failed = 0;
    for (name, f, limit) in criteria {
        let start = Instant::now();
        let mut result = f();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&result, limit) {
            if elapsed > limit {
                result = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match result {
            Ok(detail) => println!("[PASS] {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {name}: {why} ({elapsed:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
