//! Runs a MiniLang function with block coverage and a probe attached to its
//! return statement, the way snapshot observation does.
//!
//!     cargo run --example interpret -- 7 9

use retrofix::lang::parser::parse_expr;
use retrofix::lang::{parse, run, CallSpec, Limits, Probes, Value};

const SOURCE: &str = "fn cap(a: int, b: int) -> int {
    var s: int;
    s = a + b;
    while (s > 10) {
        s = s - 3;
    }
    return s;
}
";

fn main() {
    let args: Vec<i64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (a, b) = match args[..] {
        [a, b, ..] => (a, b),
        _ => (7, 9),
    };
    let program = parse(SOURCE).expect("example parses");
    let func = program.function_index("cap").unwrap();

    let ret = program.locations("cap").last().unwrap().clone();
    let mut probe = parse_expr("s == 7").unwrap();
    program.check_expr(func, &mut probe).expect("probe type-checks");
    let mut probes = Probes::new(&program);
    let group = probes.attach(ret.stmt, probe);

    let call = CallSpec {
        func: "cap".into(),
        args: vec![Value::Int(a), Value::Int(b)],
    };
    let out = run(&program, &call, Limits::default(), Some(&probes)).expect("entry resolves");
    println!("cap({a}, {b}) = {:?}", out.result);
    for (i, n) in out.coverage.block_counts(func).iter().enumerate() {
        println!("block {i}: executed {n}x");
    }
    let [f, t] = out.observations.unwrap().counts[group];
    println!("`s == 7` at the return: false {f}x, true {t}x");
}
