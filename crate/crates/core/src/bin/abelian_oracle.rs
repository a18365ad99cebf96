//! Word-problem oracle for a finitely generated abelian group, speaking the
//! line protocol of oracle peripherals.
//!
//! Usage: `abelian-oracle NAME:MODULUS ...`. Modulus 0 gives a copy of Z.
//! `WP w` answers `T` or `F`; `NF w` answers the canonical word, each
//! generator raised to its reduced exponent in argument order.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;

struct Group {
    names: Vec<String>,
    moduli: Vec<i64>,
}

impl Group {
    fn from_args(args: &[String]) -> Result<Self, String> {
        let mut names = Vec::new();
        let mut moduli = Vec::new();
        for a in args {
            let (name, m) = a.split_once(':').ok_or_else(|| format!("expected NAME:MODULUS, got `{a}`"))?;
            let m: i64 = m.parse().map_err(|_| format!("bad modulus in `{a}`"))?;
            if m < 0 || names.iter().any(|n| n == name) {
                return Err(format!("bad generator `{a}`"));
            }
            names.push(name.to_string());
            moduli.push(m);
        }
        if names.is_empty() {
            return Err("no generators".into());
        }
        Ok(Group { names, moduli })
    }

    fn exponents(&self, word: &str) -> Result<Vec<i64>, String> {
        let mut e = vec![0i64; self.names.len()];
        for tok in word.split_whitespace() {
            let (name, sign) = match tok.strip_suffix("^-1") {
                Some(n) => (n, -1),
                None => (tok, 1),
            };
            let i = self
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| format!("unknown generator `{name}`"))?;
            e[i] += sign;
        }
        for (x, &m) in e.iter_mut().zip(&self.moduli) {
            if m > 0 {
                *x = x.rem_euclid(m);
            }
        }
        Ok(e)
    }

    fn normal_form(&self, e: &[i64]) -> String {
        let mut out = Vec::new();
        for (i, &x) in e.iter().enumerate() {
            let tok = if x < 0 {
                format!("{}^-1", self.names[i])
            } else {
                self.names[i].clone()
            };
            out.extend(std::iter::repeat_n(tok, x.unsigned_abs() as usize));
        }
        out.join(" ")
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let g = match Group::from_args(&args) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("abelian-oracle: {e}");
            return ExitCode::from(2);
        }
    };
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        let (verb, word) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        let answer = match (verb, g.exponents(word)) {
            ("WP", Ok(e)) => if e.iter().all(|&x| x == 0) { "T".to_string() } else { "F".to_string() },
            ("NF", Ok(e)) => g.normal_form(&e),
            (_, Err(e)) => {
                eprintln!("abelian-oracle: {e}");
                return ExitCode::FAILURE;
            }
            (other, _) => {
                eprintln!("abelian-oracle: unknown request `{other}`");
                return ExitCode::FAILURE;
            }
        };
        if writeln!(out, "{answer}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
    ExitCode::SUCCESS
}
