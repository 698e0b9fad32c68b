//! Parser for the distribution, combinator and dependence grammars.
//!
//! ```text
//! expr  := name '(' args ')'
//! args  := arg (',' arg)*
//! arg   := key '=' value | weight ':' expr | expr
//! ```
//!
//! Families: `frechet(alpha)`, `pareto(alpha)`, `gpd(xi,beta)`,
//! `burr(alpha,tau)`, `paralogistic(alpha)`, `loglogistic(tau)`,
//! `inverse_burr(alpha,tau)`, `log_pareto(alpha)`, `stoppa(alpha,beta)`,
//! `inverse_geometric(c)`, `deadly(p)`.
//! Combinators: `scale(e,a=,b=)`, `power(e,beta=)`, `max(e,e)`,
//! `convex(e,f=name[,k=|alpha=])`, `mix(w:e,...)`, `gmean(r=,w:e,...)`.
//! Dependence: `indep`, `countermono`, `gauss(rho=)`,
//! `gauss(matrix=a b|c d)`, `clayton(theta=)`, `comono`.

use heavysum_core::combinators::{self, ConvexFn};
use heavysum_core::dependence::Correlation;
use heavysum_core::{DependenceModel, Distribution, WeightVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("at `{token}` (offset {offset}): {message}")]
pub struct ParseError {
    pub token: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    Comma,
    Eq,
    Colon,
    Pipe,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    text: String,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            ':' => Tok::Colon,
            '|' => Tok::Pipe,
            _ if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_ascii_lowercase()),
                    text: src[start..i].to_string(),
                    offset: start,
                });
                continue;
            }
            _ if c.is_ascii_digit() || matches!(c, '-' | '+' | '.') => {
                i += 1;
                while i < bytes.len() {
                    let b = bytes[i];
                    let exp_sign = matches!(b, b'-' | b'+') && matches!(bytes[i - 1], b'e' | b'E');
                    if b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E') || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    token: text.to_string(),
                    offset: start,
                    message: "malformed number".into(),
                })?;
                out.push(Token {
                    tok: Tok::Num(value),
                    text: text.to_string(),
                    offset: start,
                });
                continue;
            }
            _ => {
                let len = c.len_utf8();
                return Err(ParseError {
                    token: src[start..start + len].to_string(),
                    offset: start,
                    message: "unexpected character".into(),
                });
            }
        };
        i += 1;
        out.push(Token {
            tok,
            text: c.to_string(),
            offset: start,
        });
    }
    out.push(Token {
        tok: Tok::End,
        text: "<end>".into(),
        offset: src.len(),
    });
    Ok(out)
}

/// Right-hand side of `key=value`.
#[derive(Debug, Clone)]
enum Value {
    Num(f64),
    Name(String),
    Rows(Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
struct Call {
    name: Token,
    positional: Vec<Call>,
    weighted: Vec<(Token, f64, Call)>,
    params: Vec<(Token, Value)>,
    close: Token,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn err(t: &Token, message: impl Into<String>) -> ParseError {
    ParseError {
        token: t.text.clone(),
        offset: t.offset,
        message: message.into(),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn call(&mut self) -> Result<Call, ParseError> {
        let name = self.next();
        if !matches!(name.tok, Tok::Ident(_)) {
            return Err(err(&name, "expected a name"));
        }
        let mut call = Call {
            name,
            positional: Vec::new(),
            weighted: Vec::new(),
            params: Vec::new(),
            close: self.peek().clone(),
        };
        if self.peek().tok != Tok::LParen {
            return Ok(call);
        }
        self.next();
        if self.peek().tok == Tok::RParen {
            call.close = self.next();
            return Ok(call);
        }
        loop {
            let t = self.peek().clone();
            match (&t.tok, &self.peek2().tok) {
                (Tok::Num(w), Tok::Colon) => {
                    self.next();
                    self.next();
                    call.weighted.push((t.clone(), *w, self.call()?));
                }
                (Tok::Ident(_), Tok::Eq) => {
                    self.next();
                    self.next();
                    let v = self.value()?;
                    call.params.push((t, v));
                }
                (Tok::Ident(_), _) => call.positional.push(self.call()?),
                _ => return Err(err(&t, "expected an argument")),
            }
            let t = self.next();
            match t.tok {
                Tok::Comma => continue,
                Tok::RParen => {
                    call.close = t;
                    return Ok(call);
                }
                _ => return Err(err(&t, "expected `,` or `)`")),
            }
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok(Value::Name(s)),
            Tok::Num(v) => {
                if !matches!(self.peek().tok, Tok::Num(_) | Tok::Pipe) {
                    return Ok(Value::Num(v));
                }
                let mut rows = vec![vec![v]];
                loop {
                    match self.peek().tok {
                        Tok::Num(x) => {
                            self.next();
                            rows.last_mut().expect("nonempty").push(x);
                        }
                        Tok::Pipe => {
                            self.next();
                            rows.push(Vec::new());
                        }
                        _ => break,
                    }
                }
                Ok(Value::Rows(rows))
            }
            _ => Err(err(&t, "expected a value")),
        }
    }
}

fn parse_call(src: &str) -> Result<Call, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let call = p.call()?;
    let t = p.next();
    if t.tok != Tok::End {
        return Err(err(&t, "trailing input"));
    }
    Ok(call)
}

fn core_err(t: &Token, e: heavysum_core::Error) -> ParseError {
    err(t, e.to_string())
}

impl Call {
    fn ident(&self) -> &str {
        match &self.name.tok {
            Tok::Ident(s) => s,
            _ => "",
        }
    }

    /// Rejects unknown and repeated keys; returns numbers for `keys` in
    /// order, `None` where absent.
    fn numbers(&self, keys: &[&str]) -> Result<Vec<Option<f64>>, ParseError> {
        let mut out = vec![None; keys.len()];
        for (t, v) in &self.params {
            let key = match &t.tok {
                Tok::Ident(s) => s.as_str(),
                _ => unreachable!("parameter keys are identifiers"),
            };
            let Some(i) = keys.iter().position(|k| *k == key) else {
                return Err(err(t, format!("unknown parameter for {}", self.ident())));
            };
            if out[i].is_some() {
                return Err(err(t, "repeated parameter"));
            }
            match v {
                Value::Num(x) => out[i] = Some(*x),
                _ => return Err(err(t, "expected a number")),
            }
        }
        Ok(out)
    }

    fn require(&self, keys: &[&str]) -> Result<Vec<f64>, ParseError> {
        let vals = self.numbers(keys)?;
        keys.iter()
            .zip(vals)
            .map(|(k, v)| v.ok_or_else(|| err(&self.close, format!("missing parameter `{k}`"))))
            .collect()
    }

    fn arity(&self, positional: usize, weighted: bool) -> Result<(), ParseError> {
        if let Some(extra) = self.positional.get(positional) {
            return Err(err(&extra.name, "unexpected argument"));
        }
        if self.positional.len() < positional {
            return Err(err(&self.close, "missing distribution argument"));
        }
        if !weighted {
            if let Some((t, _, _)) = self.weighted.first() {
                return Err(err(t, "weights are not allowed here"));
            }
        }
        Ok(())
    }

    fn dist(&self) -> Result<Distribution, ParseError> {
        let n = &self.name;
        let fam = |r: heavysum_core::Result<Distribution>| r.map_err(|e| core_err(n, e));
        match self.ident() {
            "frechet" | "pareto" | "log_pareto" | "paralogistic" => {
                self.arity(0, false)?;
                let [a] = self.require(&["alpha"])?[..] else { unreachable!() };
                fam(match self.ident() {
                    "frechet" => Distribution::frechet(a),
                    "pareto" => Distribution::pareto(a),
                    "log_pareto" => Distribution::log_pareto(a),
                    _ => Distribution::paralogistic(a),
                })
            }
            "loglogistic" | "log_logistic" => {
                self.arity(0, false)?;
                let [t] = self.require(&["tau"])?[..] else { unreachable!() };
                fam(Distribution::log_logistic(t))
            }
            "gpd" => {
                self.arity(0, false)?;
                let [x, b] = self.require(&["xi", "beta"])?[..] else { unreachable!() };
                fam(Distribution::generalized_pareto(x, b))
            }
            "burr" | "inverse_burr" => {
                self.arity(0, false)?;
                let [a, t] = self.require(&["alpha", "tau"])?[..] else { unreachable!() };
                fam(if self.ident() == "burr" {
                    Distribution::burr(a, t)
                } else {
                    Distribution::inverse_burr(a, t)
                })
            }
            "stoppa" => {
                self.arity(0, false)?;
                let [a, b] = self.require(&["alpha", "beta"])?[..] else { unreachable!() };
                fam(Distribution::stoppa(a, b))
            }
            "inverse_geometric" => {
                self.arity(0, false)?;
                let [c] = self.require(&["c"])?[..] else { unreachable!() };
                fam(Distribution::inverse_geometric(c))
            }
            "deadly" => {
                self.arity(0, false)?;
                let [p] = self.require(&["p"])?[..] else { unreachable!() };
                fam(Distribution::deadly(p))
            }
            "scale" => {
                self.arity(1, false)?;
                let v = self.numbers(&["a", "b"])?;
                let a = v[0].ok_or_else(|| err(&self.close, "missing parameter `a`"))?;
                fam(combinators::scale_shift(&self.positional[0].dist()?, a, v[1].unwrap_or(0.0)))
            }
            "power" => {
                self.arity(1, false)?;
                let [b] = self.require(&["beta"])?[..] else { unreachable!() };
                fam(combinators::power(&self.positional[0].dist()?, b))
            }
            "max" => {
                self.arity(2, false)?;
                self.require(&[])?;
                Ok(combinators::max_of(
                    &self.positional[0].dist()?,
                    &self.positional[1].dist()?,
                ))
            }
            "convex" => {
                self.arity(1, false)?;
                let f = self.convex_fn()?;
                fam(combinators::convex_transform(&self.positional[0].dist()?, f))
            }
            "mix" | "gmean" => {
                self.arity(0, true)?;
                let (parts, weights) = self.weighted_parts()?;
                if self.ident() == "mix" {
                    self.require(&[])?;
                    fam(combinators::mixture(&parts, &weights))
                } else {
                    let [r] = self.require(&["r"])?[..] else { unreachable!() };
                    fam(combinators::generalized_r_mean(&parts, &weights, r))
                }
            }
            _ => Err(err(n, "unknown distribution")),
        }
    }

    fn weighted_parts(&self) -> Result<(Vec<Distribution>, WeightVector), ParseError> {
        if self.weighted.is_empty() {
            return Err(err(&self.close, "expected `weight:distribution` arguments"));
        }
        let parts = self
            .weighted
            .iter()
            .map(|(_, _, c)| c.dist())
            .collect::<Result<Vec<_>, _>>()?;
        let weights = WeightVector::new(self.weighted.iter().map(|(_, w, _)| *w).collect())
            .map_err(|e| core_err(&self.weighted[0].0, e))?;
        Ok((parts, weights))
    }

    fn convex_fn(&self) -> Result<ConvexFn, ParseError> {
        let mut name = None;
        let mut rest = Vec::new();
        for (t, v) in &self.params {
            match (&t.tok, v) {
                (Tok::Ident(k), Value::Name(f)) if k == "f" => {
                    if name.is_some() {
                        return Err(err(t, "repeated parameter"));
                    }
                    name = Some((t, f.clone()));
                }
                _ => rest.push((t.clone(), v.clone())),
            }
        }
        let Some((ft, fname)) = name else {
            return Err(err(&self.close, "missing parameter `f`"));
        };
        let sub = Call {
            name: ft.clone(),
            positional: Vec::new(),
            weighted: Vec::new(),
            params: rest,
            close: self.close.clone(),
        };
        let bad = |e| core_err(ft, e);
        match fname.as_str() {
            "identity" => sub.require(&[]).map(|_| ConvexFn::identity()),
            "square" => sub.require(&[]).map(|_| ConvexFn::square()),
            "expm1" => sub.require(&[]).map(|_| ConvexFn::expm1()),
            "pow" => ConvexFn::pow(sub.require(&["k"])?[0]).map_err(bad),
            "pareto_reshape" => ConvexFn::pareto_reshape(sub.require(&["alpha"])?[0]).map_err(bad),
            _ => Err(ParseError {
                token: fname,
                offset: ft.offset,
                message: "unknown convex function".into(),
            }),
        }
    }

    fn dependence(&self) -> Result<DependenceModel, ParseError> {
        let plain = |m: DependenceModel| {
            self.arity(0, false)?;
            self.require(&[])?;
            Ok(m)
        };
        match self.ident() {
            "indep" => plain(DependenceModel::Independent),
            "countermono" => plain(DependenceModel::CounterMonotone),
            "comono" => plain(DependenceModel::Comonotone),
            "clayton" => {
                self.arity(0, false)?;
                let [t] = self.require(&["theta"])?[..] else { unreachable!() };
                if !(-1.0..0.0).contains(&t) {
                    return Err(err(&self.params[0].0, "theta must lie in [-1, 0)"));
                }
                Ok(DependenceModel::clayton(t))
            }
            "gauss" => {
                self.arity(0, false)?;
                match self.params.as_slice() {
                    [(t, v)] => match (&t.tok, v) {
                        (Tok::Ident(k), Value::Num(rho)) if k == "rho" => {
                            Ok(DependenceModel::gaussian(*rho))
                        }
                        (Tok::Ident(k), Value::Rows(rows)) if k == "matrix" => {
                            Ok(DependenceModel::Gaussian(Correlation::Matrix(rows.clone())))
                        }
                        (Tok::Ident(k), Value::Num(x)) if k == "matrix" => {
                            Ok(DependenceModel::Gaussian(Correlation::Matrix(vec![vec![*x]])))
                        }
                        _ => Err(err(t, "expected `rho=<number>` or `matrix=<rows>`")),
                    },
                    [] => Err(err(&self.close, "missing parameter `rho`")),
                    [_, (t, _), ..] => Err(err(t, "unexpected parameter")),
                }
            }
            _ => Err(err(&self.name, "unknown dependence model")),
        }
    }
}

/// Parses a distribution expression.
pub fn parse_dist(src: &str) -> Result<Distribution, ParseError> {
    parse_call(src)?.dist()
}

/// Parses a `;`-separated list of distribution expressions.
pub fn parse_dist_list(src: &str) -> Result<Vec<Distribution>, ParseError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in src.split(';') {
        if !piece.trim().is_empty() {
            out.push(parse_dist(piece).map_err(|mut e| {
                e.offset += offset;
                e
            })?);
        }
        offset += piece.len() + 1;
    }
    if out.is_empty() {
        return Err(ParseError {
            token: src.to_string(),
            offset: 0,
            message: "empty distribution list".into(),
        });
    }
    Ok(out)
}

/// Parses a dependence expression.
pub fn parse_dependence(src: &str) -> Result<DependenceModel, ParseError> {
    parse_call(src)?.dependence()
}

/// Parses a comma-separated list of numbers.
pub fn parse_numbers(src: &str) -> Result<Vec<f64>, ParseError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in src.split(',') {
        let t = piece.trim();
        let v: f64 = t.parse().map_err(|_| ParseError {
            token: t.to_string(),
            offset,
            message: "expected a number".into(),
        })?;
        out.push(v);
        offset += piece.len() + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families() {
        let d = parse_dist("pareto(alpha=1.0)").unwrap();
        assert_eq!(d.cdf(1.0), 0.5);
        let d = parse_dist(" burr( alpha = 0.8 , tau=0.9 ) ").unwrap();
        assert_eq!(d.expression(), "burr(alpha=0.8,tau=0.9)");
        assert_eq!(parse_dist("deadly(p=0.3)").unwrap().cdf(10.0), 0.7);
        assert_eq!(
            parse_dist("paralogistic(alpha=0.5)").unwrap().expression(),
            "burr(alpha=0.5,tau=0.5)"
        );
        assert_eq!(
            parse_dist("loglogistic(tau=0.5)").unwrap().expression(),
            "burr(alpha=1,tau=0.5)"
        );
    }

    #[test]
    fn combinators() {
        let d = parse_dist("power(pareto(alpha=1),beta=2)").unwrap();
        assert_eq!(d.cdf(1.0), 0.25);
        let d = parse_dist("mix(0.3:pareto(alpha=1),0.7:pareto(alpha=0.5))").unwrap();
        assert!((d.cdf(1.0) - 0.355025).abs() < 1e-6);
        let d = parse_dist("gmean(r=0, 0.5:burr(alpha=0.8,tau=1),0.5:pareto(alpha=0.7))").unwrap();
        assert!(d.cdf(1.0) > 0.0);
        let d = parse_dist("convex(pareto(alpha=1),f=pow,k=2)").unwrap();
        assert!((d.cdf(4.0) - 2.0 / 3.0).abs() < 1e-12);
        let d = parse_dist("scale(pareto(alpha=1),a=2)").unwrap();
        assert_eq!(d.quantile(0.5).unwrap(), 2.0);
        parse_dist("max(frechet(alpha=1),deadly(p=0.1))").unwrap();
    }

    #[test]
    fn errors_name_the_token() {
        let e = parse_dist("pareto(alpha=1,bogus=2)").unwrap_err();
        assert_eq!(e.token, "bogus");
        assert_eq!(e.offset, 15);
        let e = parse_dist("parteo(alpha=1)").unwrap_err();
        assert_eq!(e.token, "parteo");
        let e = parse_dist("pareto(alpha=1").unwrap_err();
        assert_eq!(e.token, "<end>");
        let e = parse_dist("pareto(alpha=-1)").unwrap_err();
        assert_eq!(e.token, "pareto");
        let e = parse_dist("pareto(alpha=1,alpha=2)").unwrap_err();
        assert_eq!(e.message, "repeated parameter");
        let e = parse_dist("mix(0.5:pareto(alpha=1),0.4:pareto(alpha=1))").unwrap_err();
        assert_eq!(e.token, "0.5");
        let e = parse_dist("convex(pareto(alpha=1),f=cube)").unwrap_err();
        assert_eq!(e.token, "cube");
        let e = parse_dist_list("pareto(alpha=1);burr(alpha=1,x=2)").unwrap_err();
        assert_eq!((e.token.as_str(), e.offset), ("x", 29));
    }

    #[test]
    fn dependence() {
        for s in ["indep", "countermono", "gauss(rho=-0.4)", "clayton(theta=-0.5)", "comono"] {
            assert_eq!(parse_dependence(s).unwrap().to_string(), s);
        }
        let m = parse_dependence("gauss(matrix=1 -0.3|-0.3 1)").unwrap();
        assert_eq!(parse_dependence(&m.to_string()).unwrap(), m);
        assert!(parse_dependence("clayton(theta=0.5)").is_err());
        assert_eq!(parse_dependence("gauss(rh=1)").unwrap_err().token, "rh");
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_numbers("0.5, 0.5").unwrap(), vec![0.5, 0.5]);
        assert_eq!(parse_numbers("0.5,x").unwrap_err().token, "x");
    }
}
