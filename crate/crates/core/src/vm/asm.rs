//! Textual assembly format.
//!
//! One instruction per line, operands separated by commas, `;` starts a
//! comment. A line may start with `label:`. Directives: `.name <text>` and
//! `.entry <label>`. Branch targets are labels or `@<index>`.
//!
//! ```text
//! .name const2
//!     emitb 1
//!     emitb 0
//!     halt
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigUint;

use super::program::{InputField, Instr, Program, Reg};
use crate::error::{Error, Result};

struct Line<'a> {
    number: usize,
    mnemonic: &'a str,
    args: Vec<&'a str>,
}

fn asm_err(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, message: message.into() }
}

/// Parses a program from assembly text.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut name = String::from("anonymous");
    let mut entry_label: Option<(usize, String)> = None;
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut lines = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let mut rest = raw.split(';').next().unwrap_or("").trim();
        if rest.is_empty() {
            continue;
        }
        if let Some(d) = rest.strip_prefix('.') {
            let (key, val) = d.split_once(char::is_whitespace).unwrap_or((d, ""));
            match key {
                "name" => name = val.trim().to_string(),
                "entry" => entry_label = Some((number, val.trim().to_string())),
                other => return Err(asm_err(number, format!("unknown directive .{other}"))),
            }
            continue;
        }
        while let Some((head, tail)) = rest.split_once(':') {
            let label = head.trim();
            if label.is_empty() || !label.chars().all(|c| c.is_alphanumeric() || c == '_') {
                break;
            }
            if labels.insert(label.to_string(), lines.len()).is_some() {
                return Err(asm_err(number, format!("duplicate label {label}")));
            }
            rest = tail.trim();
        }
        if rest.is_empty() {
            continue;
        }
        let (mnemonic, args) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let args: Vec<&str> =
            if args.trim().is_empty() { vec![] } else { args.split(',').map(str::trim).collect() };
        lines.push(Line { number, mnemonic, args });
    }

    let resolve = |line: usize, tok: &str| -> Result<usize> {
        if let Some(i) = tok.strip_prefix('@') {
            return i.parse().map_err(|_| asm_err(line, format!("bad instruction index {tok}")));
        }
        labels.get(tok).copied().ok_or_else(|| asm_err(line, format!("undefined label {tok}")))
    };

    let mut instrs = Vec::with_capacity(lines.len());
    for l in &lines {
        instrs.push(parse_instr(l, &resolve)?);
    }
    let entry = match entry_label {
        Some((line, label)) => resolve(line, &label)?,
        None => 0,
    };
    if instrs.is_empty() {
        return Err(asm_err(1, "program has no instructions"));
    }
    // bad targets become load errors with the offending line
    for (ins, l) in instrs.iter().zip(&lines) {
        if let Some(t) = ins.target() {
            if t >= instrs.len() {
                return Err(asm_err(l.number, format!("branch target {t} outside program")));
            }
        }
    }
    Program::new(name, instrs, entry)
}

fn parse_instr(l: &Line<'_>, resolve: &dyn Fn(usize, &str) -> Result<usize>) -> Result<Instr> {
    let n = l.number;
    let want = |k: usize| -> Result<()> {
        if l.args.len() == k {
            Ok(())
        } else {
            Err(asm_err(n, format!("{} expects {k} operands, got {}", l.mnemonic, l.args.len())))
        }
    };
    let reg = |i: usize| -> Result<Reg> {
        let tok = l.args[i];
        tok.strip_prefix('r')
            .and_then(|d| d.parse::<u8>().ok())
            .and_then(Reg::new)
            .ok_or_else(|| asm_err(n, format!("bad register {tok}")))
    };
    let target = |i: usize| resolve(n, l.args[i]);

    let ins = match l.mnemonic {
        "set" => {
            want(2)?;
            let v: BigUint =
                l.args[1].parse().map_err(|_| asm_err(n, format!("bad immediate {}", l.args[1])))?;
            Instr::Set(reg(0)?, v)
        }
        "mov" => {
            want(2)?;
            Instr::Mov(reg(0)?, reg(1)?)
        }
        "input" => {
            want(2)?;
            let f = InputField::parse(l.args[1])
                .ok_or_else(|| asm_err(n, format!("unknown input field {}", l.args[1])))?;
            Instr::Input(reg(0)?, f)
        }
        "add" | "sub" | "mul" | "shl" | "shr" => {
            want(3)?;
            let (d, a, b) = (reg(0)?, reg(1)?, reg(2)?);
            match l.mnemonic {
                "add" => Instr::Add(d, a, b),
                "sub" => Instr::Sub(d, a, b),
                "mul" => Instr::Mul(d, a, b),
                "shl" => Instr::Shl(d, a, b),
                _ => Instr::Shr(d, a, b),
            }
        }
        "divmod" => {
            want(4)?;
            Instr::DivMod(reg(0)?, reg(1)?, reg(2)?, reg(3)?)
        }
        "bitlen" => {
            want(2)?;
            Instr::BitLen(reg(0)?, reg(1)?)
        }
        "jmp" => {
            want(1)?;
            Instr::Jmp(target(0)?)
        }
        "jlt" | "jle" | "jeq" | "jne" => {
            want(3)?;
            let (a, b, t) = (reg(0)?, reg(1)?, target(2)?);
            match l.mnemonic {
                "jlt" => Instr::Jlt(a, b, t),
                "jle" => Instr::Jle(a, b, t),
                "jeq" => Instr::Jeq(a, b, t),
                _ => Instr::Jne(a, b, t),
            }
        }
        "jz" | "jnz" => {
            want(2)?;
            let (a, t) = (reg(0)?, target(1)?);
            if l.mnemonic == "jz" {
                Instr::Jz(a, t)
            } else {
                Instr::Jnz(a, t)
            }
        }
        "rbit" => {
            want(1)?;
            Instr::RBit(reg(0)?)
        }
        "rbits" => {
            want(2)?;
            Instr::RBits(reg(0)?, reg(1)?)
        }
        "emit" => {
            want(1)?;
            Instr::Emit(reg(0)?)
        }
        "emitb" => {
            want(1)?;
            match l.args[0] {
                "0" => Instr::EmitB(false),
                "1" => Instr::EmitB(true),
                other => return Err(asm_err(n, format!("emitb takes 0 or 1, got {other}"))),
            }
        }
        "emitint" => {
            want(1)?;
            Instr::EmitInt(reg(0)?)
        }
        "emitones" => {
            want(1)?;
            Instr::EmitOnes(reg(0)?)
        }
        "halt" => {
            want(0)?;
            Instr::Halt
        }
        other => return Err(asm_err(n, format!("unknown instruction {other}"))),
    };
    Ok(ins)
}

/// Renders a program in canonical assembly. Branch targets are printed as
/// `L<index>` labels.
pub fn to_asm(p: &Program) -> String {
    let mut targets: Vec<usize> = p.instrs().iter().filter_map(Instr::target).collect();
    if p.entry() != 0 {
        targets.push(p.entry());
    }
    targets.sort_unstable();
    targets.dedup();

    let mut s = String::new();
    let _ = writeln!(s, ".name {}", p.name());
    if p.entry() != 0 {
        let _ = writeln!(s, ".entry L{}", p.entry());
    }
    for (i, ins) in p.instrs().iter().enumerate() {
        if targets.binary_search(&i).is_ok() {
            let _ = writeln!(s, "L{i}:");
        }
        let ops = match ins {
            Instr::Set(d, v) => format!("{d}, {v}"),
            Instr::Mov(d, a) | Instr::BitLen(d, a) | Instr::RBits(d, a) => format!("{d}, {a}"),
            Instr::Input(d, f) => format!("{d}, {}", f.name()),
            Instr::Add(d, a, b) | Instr::Sub(d, a, b) | Instr::Mul(d, a, b) => format!("{d}, {a}, {b}"),
            Instr::Shl(d, a, b) | Instr::Shr(d, a, b) => format!("{d}, {a}, {b}"),
            Instr::DivMod(q, r, a, b) => format!("{q}, {r}, {a}, {b}"),
            Instr::Jmp(t) => format!("L{t}"),
            Instr::Jlt(a, b, t) | Instr::Jle(a, b, t) | Instr::Jeq(a, b, t) | Instr::Jne(a, b, t) => {
                format!("{a}, {b}, L{t}")
            }
            Instr::Jz(a, t) | Instr::Jnz(a, t) => format!("{a}, L{t}"),
            Instr::RBit(d) | Instr::Emit(d) | Instr::EmitInt(d) | Instr::EmitOnes(d) => d.to_string(),
            Instr::EmitB(b) => u8::from(*b).to_string(),
            Instr::Halt => String::new(),
        };
        if ops.is_empty() {
            let _ = writeln!(s, "    {}", ins.mnemonic());
        } else {
            let _ = writeln!(s, "    {} {ops}", ins.mnemonic());
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels_comments_and_directives() {
        let p = parse_program(
            "; trial loop\n.name demo\n.entry start\nend: halt\nstart: set r0, 5 ; five\n  jmp end\n",
        )
        .unwrap();
        assert_eq!(p.name(), "demo");
        assert_eq!(p.entry(), 1);
        assert_eq!(p.instrs()[2], Instr::Jmp(0));
    }

    #[test]
    fn undefined_label_is_line_anchored() {
        let err = parse_program("halt\njmp nowhere\n").unwrap_err();
        match err {
            Error::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn numeric_target_out_of_range_rejected_at_load() {
        let err = parse_program("jmp @7\nhalt\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, .. }));
    }

    #[test]
    fn bad_register_rejected() {
        assert!(parse_program("set r16, 1").is_err());
        assert!(parse_program("set x1, 1").is_err());
    }

    #[test]
    fn printer_round_trips() {
        let src = ".name loop\nstart: input r0, eps\nset r1, 1\ntop: sub r0, r0, r1\njnz r0, top\nemitb 1\nhalt\n";
        let p = parse_program(src).unwrap();
        let again = parse_program(&to_asm(&p)).unwrap();
        assert_eq!(p, again);
    }
}
