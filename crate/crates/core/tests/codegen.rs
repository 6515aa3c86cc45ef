use std::fmt::Write;
use std::process::Command;

use pnstencil_core::cas::{evaluate_with, param_name, Env, FieldSample, Unknown};
use pnstencil_core::pn::{build_cda, build_pn, Dim};
use pnstencil_core::stencil::{compile_equations, StencilProgram};

const VALUE_FN: &str = r#"
fn value(name: &str, pos: [i32; 3], seed: f64) -> f64 {
    let mut s = 0.0;
    for (i, b) in name.bytes().enumerate() {
        s += f64::from(b) * (i as f64 + 1.0);
    }
    1.5 + (0.013 * s + 0.7 * f64::from(pos[0]) - 0.3 * f64::from(pos[1]) + 0.11 * f64::from(pos[2]) + seed).sin()
}
"#;

// must stay identical to VALUE_FN
fn value(name: &str, pos: [i32; 3], seed: f64) -> f64 {
    let mut s = 0.0;
    for (i, b) in name.bytes().enumerate() {
        s += f64::from(b) * (i as f64 + 1.0);
    }
    1.5 + (0.013 * s + 0.7 * f64::from(pos[0]) - 0.3 * f64::from(pos[1]) + 0.11 * f64::from(pos[2]) + seed).sin()
}

struct Table {
    seed: f64,
    h: f64,
}

impl Env for Table {
    fn symbol(&self, _: &str) -> Option<f64> {
        Some(self.h)
    }
    fn unknown(&self, _: &Unknown, _: [u8; 3]) -> Option<f64> {
        None
    }
    fn field(&self, f: &FieldSample, _: [u8; 3]) -> Option<f64> {
        Some(value(&param_name(f.param), f.pos.0, self.seed))
    }
}

fn program_main(p: &StencilProgram) -> String {
    let mut s = p.to_source();
    s.push_str(VALUE_FN);
    s.push_str("fn main() {\n");
    s.push_str("    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();\n");
    s.push_str("    let (seed, h) = (args[0], args[1]);\n");
    s.push_str("    let field = move |n: &str, p: [i32; 3]| value(n, p, seed);\n");
    s.push_str("    let sym = move |_: &str| h;\n");
    for (k, row) in p.rows.iter().enumerate() {
        let n = row.entries.len() + 1;
        writeln!(s, "    let mut out = vec![0.0f64; {n}];").unwrap();
        writeln!(s, "    row_{k}(&field, &sym, &mut out);").unwrap();
        s.push_str("    println!(\"{:?}\", out);\n");
    }
    s.push_str("}\n");
    s
}

fn parse_line(line: &str) -> Vec<f64> {
    line.trim_matches(|c| c == '[' || c == ']')
        .split(", ")
        .map(|v| v.parse().unwrap())
        .collect()
}

fn dual_path(p: &StencilProgram) {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.rs");
    let bin = dir.path().join("stencil_bin");
    std::fs::write(&src, program_main(p)).unwrap();
    let rustc = std::env::var("RUSTC").unwrap_or_else(|_| "rustc".into());
    let status = Command::new(rustc)
        .args(["--edition", "2021", "-O", "-o"])
        .arg(&bin)
        .arg(&src)
        .status()
        .expect("rustc runs");
    assert!(status.success(), "generated source does not compile");
    for k in 0..10 {
        let env = Table {
            seed: 0.37 * f64::from(k),
            h: 0.05 + 0.01 * f64::from(k),
        };
        let out = Command::new(&bin)
            .args([env.seed.to_string(), env.h.to_string()])
            .output()
            .unwrap();
        let text = String::from_utf8(out.stdout).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), p.rows.len());
        for (row, line) in p.rows.iter().zip(lines) {
            let got = parse_line(line);
            let mut want: Vec<f64> = row
                .entries
                .iter()
                .map(|e| evaluate_with(&e.coefficient, &env).unwrap())
                .collect();
            want.push(-evaluate_with(&row.rhs, &env).unwrap());
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-14 * (1.0 + w.abs()), "row {}: {g} vs {w}", row.unknown);
            }
        }
    }
}

#[test]
fn generated_diffusion_row_matches_interpreter() {
    dual_path(&compile_equations(&build_cda(Dim::Three)).unwrap());
}

#[test]
fn generated_p2_rows_match_interpreter() {
    dual_path(&compile_equations(&build_pn(2, Dim::Three).unwrap()).unwrap());
}
