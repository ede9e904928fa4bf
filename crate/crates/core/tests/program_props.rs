use proptest::prelude::*;
use qmem::program::{execute, parse, sweep_dataset, ExecOptions, ParseErrorKind};
use qmem::DeviceParams;

fn num() -> impl Strategy<Value = String> {
    prop_oneof![
        (-10.0f64..10.0).prop_map(|x| format!("{x}")),
        (0.0f64..4.0).prop_map(|x| format!("{x}pi")),
        Just("pi".to_string()),
        Just("-0.5pi".to_string()),
        Just("$x".to_string()),
    ]
}

fn positive() -> impl Strategy<Value = String> {
    prop_oneof![(0.0f64..10.0).prop_map(|x| format!("{x}")), (0.0f64..2.0).prop_map(|x| format!("{x}pi")), Just("$x".to_string())]
}

fn line() -> impl Strategy<Value = String> {
    prop_oneof![
        (0usize..3, 0usize..3).prop_map(|(n, m)| format!("prep fock {n} {m}")),
        Just("prep state21".to_string()),
        (positive(), num()).prop_map(|(a, b)| format!("prep coherent {a} 0.5 phase_a={b}")),
        (positive(), num(), prop::bool::ANY).prop_map(|(t, p, phys)| {
            let mode = if phys { " mode=physical" } else { "" };
            format!("bs theta={t} phi={p}{mode}")
        }),
        (positive(), num()).prop_map(|(t, p)| format!("bs t={t} phi={p}")),
        num().prop_map(|p| format!("dps phi={p}")),
        num().prop_map(|p| format!("dps branch={p} mode=ideal")),
        positive().prop_map(|t| format!("dps t={t}")),
        (num(), num(), prop::bool::ANY).prop_map(|(a, p, c)| format!("displace cavity={} alpha={a} phase={p}", if c { "a" } else { "b" })),
        positive().prop_map(|t| format!("wait t={t}")),
        Just("measure joint".to_string()),
        Just("measure parity a".to_string()),
        Just("measure parity b".to_string()),
        Just("measure overlap".to_string()),
        (0.001f64..0.1).prop_map(|g| format!("set g={g}")),
        Just("# comment only".to_string()),
        Just(String::new()),
    ]
}

fn program_text() -> impl Strategy<Value = String> {
    (prop::collection::vec(line(), 1..12), prop::bool::ANY, prop::bool::ANY).prop_map(|(lines, header, physical)| {
        let mut out = String::new();
        if header {
            out.push_str("dims 5 4\nspam on\npostselect off\n");
            if physical {
                out.push_str("mode physical\n");
            }
        }
        // placeholder must be bound exactly when used
        if lines.iter().any(|l| l.contains("$x")) {
            out.push_str("sweep x from 0 to 1 steps 3\n");
        }
        for l in lines {
            out.push_str(&l);
            out.push('\n');
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_print_parse_is_stable(text in program_text()) {
        let first = parse(&text).unwrap();
        let printed = first.to_canonical();
        let second = parse(&printed).unwrap();
        prop_assert_eq!(&second, &first);
        prop_assert_eq!(second.to_canonical(), printed);
    }

    #[test]
    fn parse_errors_carry_location(junk in "[a-z]{3,8}", pos in 0usize..4) {
        let mut lines = vec!["prep fock 1 0", "bs theta=0.25pi", "measure joint"];
        let bad = format!("{junk}x arg=1");
        lines.insert(pos.min(lines.len()), &bad);
        let err = parse(&lines.join("\n")).unwrap_err();
        prop_assert_eq!(err.kind, ParseErrorKind::UnknownInstruction);
        prop_assert_eq!(err.line, pos.min(3) + 1);
        prop_assert_eq!(err.column, 1);
    }
}

fn gate_line() -> impl Strategy<Value = String> {
    prop_oneof![
        (0.0f64..3.2, 0.0f64..6.3).prop_map(|(t, p)| format!("bs theta={t} phi={p}")),
        (0.0f64..6.3).prop_map(|p| format!("dps phi={p}")),
        (0.0f64..6.3).prop_map(|p| format!("dps branch={p}")),
        Just("measure joint".to_string()),
        Just("measure parity a".to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ideal_execution_commutes_with_wait_zero(
        gates in prop::collection::vec(gate_line(), 1..8),
        at in 0usize..8,
        n in 0usize..3,
    ) {
        let mut lines = vec!["dims 5 5".to_string(), format!("prep fock {n} {}", 2 - n)];
        lines.extend(gates);
        lines.push("measure joint".into());
        let plain = lines.join("\n");
        let pos = 2 + at.min(lines.len() - 2);
        lines.insert(pos, "wait t=0".into());
        let waited = lines.join("\n");
        let params = DeviceParams::default();
        let a = execute(&parse(&plain).unwrap(), &params).unwrap();
        let b = execute(&parse(&waited).unwrap(), &params).unwrap();
        prop_assert_eq!(a[0].measurements.len(), b[0].measurements.len());
        for (x, y) in a[0].measurements.iter().zip(&b[0].measurements) {
            for ((k1, v1), (k2, v2)) in x.values.iter().zip(&y.values) {
                prop_assert_eq!(k1, k2);
                prop_assert_eq!(v1.to_bits(), v2.to_bits());
            }
        }
    }
}

#[test]
fn executor_is_bit_deterministic() {
    let src = "dims 5 5\nmode physical\nsweep t from 0 to 8 steps 9\nprep fock 1 1\nbs t=$t phi=0.3\ndps branch=pi\nmeasure joint\nmeasure parity a\n";
    let prog = parse(src).unwrap();
    let params = DeviceParams::default();
    let a = sweep_dataset(&prog, &params, &ExecOptions::default()).unwrap();
    let b = sweep_dataset(&prog, &params, &ExecOptions::default()).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert!(ra.iter().zip(rb).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
