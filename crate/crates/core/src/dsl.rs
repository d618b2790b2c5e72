//! Text syntax for [`KFunction`]s.
//!
//! ```text
//! expr    := term ('+' term)*
//! term    := factor ('*' factor)*
//! factor  := atom ('^' integer)?
//! atom    := 'x' | number | '(' expr ')'
//!          | 'const(' s ')' | 'step(' s ')' | 'cantor(' k ',' s ')'
//!          | 'digitw(' s ',' '[' s (',' s)* ']' ')'
//!          | 'scale(' s ',' expr ')'
//!          | 'pullback(' '[' d (',' d)* ']' ',' expr ')'
//! ```
//!
//! Scalars `s` are decimals or `p/q`. `digitw(r,[c_0,…])` is
//! `Σ_i c_{s_i} r^i`. `pullback` needs source and target IFSs in the
//! [`ParseContext`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ifs::Ifs;
use crate::kfunc::KFunction;
use crate::scalar::Scalar;
use crate::substitution::{Permutation, SubstitutionMap, DEFAULT_CHECK_DEPTH};

#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    pub source: Option<Ifs>,
    pub target: Option<Ifs>,
    pub check_depth: Option<usize>,
}

impl ParseContext {
    pub fn substitution(source: Ifs, target: Ifs) -> Self {
        ParseContext { source: Some(source), target: Some(target), check_depth: None }
    }
}

pub fn parse(text: &str) -> Result<KFunction> {
    parse_with(text, &ParseContext::default())
}

pub fn parse_with(text: &str, ctx: &ParseContext) -> Result<KFunction> {
    let mut p = Parser { src: text, pos: 0, ctx };
    let f = p.expr()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::ExprParse { pos: self.pos, msg: msg.to_string() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<KFunction> {
        let mut f = self.term()?;
        while self.eat('+') {
            f = f + self.term()?;
        }
        Ok(f)
    }

    fn term(&mut self) -> Result<KFunction> {
        let mut f = self.factor()?;
        while self.eat('*') {
            f = f * self.factor()?;
        }
        Ok(f)
    }

    fn factor(&mut self) -> Result<KFunction> {
        let base = self.atom()?;
        if self.eat('^') {
            let m = self.integer()?;
            let m = u32::try_from(m).map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(m));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let len = self.rest().chars().take_while(char::is_ascii_digit).count();
        if len == 0 {
            return Err(self.err("expected a non-negative integer"));
        }
        let v = self.rest()[..len].parse().map_err(|_| self.err("integer out of range"))?;
        self.pos += len;
        Ok(v)
    }

    /// A scalar argument: everything up to the next `,`, `)` or `]`.
    fn scalar_arg(&mut self) -> Result<Scalar> {
        self.skip_ws();
        let len = self.rest().find([',', ')', ']']).unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        let v = Scalar::parse(text).map_err(|_| self.err(&format!("invalid scalar {:?}", text.trim())))?;
        self.pos += len;
        Ok(v)
    }

    /// A bare numeric literal inside an expression: digits, `.` and `/`.
    fn literal(&mut self) -> Result<Scalar> {
        let len = self.rest().chars().take_while(|c| c.is_ascii_digit() || *c == '.' || *c == '/').count();
        let text = &self.rest()[..len];
        let v = Scalar::parse(text).map_err(|_| self.err(&format!("invalid number {text:?}")))?;
        self.pos += len;
        Ok(v)
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let len = self.rest().chars().take_while(char::is_ascii_alphabetic).count();
        let start = self.pos;
        self.pos += len;
        &self.src[start..start + len]
    }

    fn scalar_list(&mut self) -> Result<Vec<Scalar>> {
        self.expect('[')?;
        let mut out = vec![self.scalar_arg()?];
        while self.eat(',') {
            out.push(self.scalar_arg()?);
        }
        self.expect(']')?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<KFunction> {
        self.skip_ws();
        if self.eat('(') {
            let f = self.expr()?;
            self.expect(')')?;
            return Ok(f);
        }
        if self.rest().starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            return Ok(KFunction::constant(self.literal()?));
        }
        let start = self.pos;
        let name = self.ident().to_string();
        if name == "x" {
            return Ok(KFunction::x());
        }
        if !["const", "step", "cantor", "digitw", "scale", "pullback"].contains(&name.as_str()) {
            self.pos = start;
            return Err(self.err(&format!("expected a function, found {name:?}")));
        }
        self.expect('(')?;
        let f = match name.as_str() {
            "const" => KFunction::constant(self.scalar_arg()?),
            "step" => KFunction::step(self.scalar_arg()?),
            "cantor" => {
                let k = self.integer()?;
                let k = u32::try_from(k).map_err(|_| self.err("k too large"))?;
                self.expect(',')?;
                let p = self.scalar_arg()?;
                KFunction::cantor(k, p).map_err(|e| Error::ExprParse { pos: start, msg: e.to_string() })?
            }
            "digitw" => {
                let ratio = self.scalar_arg()?;
                self.expect(',')?;
                KFunction::digit_weighted(ratio, self.scalar_list()?)
            }
            "scale" => {
                let c = self.scalar_arg()?;
                self.expect(',')?;
                KFunction::scale(c, self.expr()?)
            }
            "pullback" => {
                self.expect('[')?;
                let mut digits = vec![self.integer()? as usize];
                while self.eat(',') {
                    digits.push(self.integer()? as usize);
                }
                self.expect(']')?;
                self.expect(',')?;
                let inner = self.expr()?;
                let (Some(source), Some(target)) = (&self.ctx.source, &self.ctx.target) else {
                    return Err(Error::ExprParse {
                        pos: start,
                        msg: "pullback needs a source and a target IFS".into(),
                    });
                };
                let wrap = |e: Error| Error::ExprParse { pos: start, msg: e.to_string() };
                let rho = Permutation::new(digits).map_err(wrap)?;
                let depth = self.ctx.check_depth.unwrap_or(DEFAULT_CHECK_DEPTH);
                let map = SubstitutionMap::new(source.clone(), target.clone(), rho, depth).map_err(wrap)?;
                KFunction::pullback(Arc::new(map), inner)
            }
            _ => unreachable!(),
        };
        self.expect(')')?;
        Ok(f)
    }
}
