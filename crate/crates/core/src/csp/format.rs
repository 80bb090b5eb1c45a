//! Instance text format:
//!
//! ```text
//! cspf k n m
//! table <hex> | ltf k θ w1 .. wk
//! w j1 s1 .. jk sk        (m lines, 1-based j, s in {+,-})
//! ```
//!
//! Weights may be written as integers, `p/q` or exact decimals; they are
//! written back as integers or `p/q`.

use std::fmt::Write as _;
use std::io::BufRead;

use super::{check_constraint, Constraint, CspInstance, Predicate};
use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational};

pub fn write_instance(inst: &CspInstance) -> String {
    let mut out = String::new();
    let k = inst.predicate().arity();
    writeln!(out, "cspf {k} {} {}", inst.n(), inst.m()).unwrap();
    writeln!(out, "{}", inst.predicate()).unwrap();
    for c in inst.stream() {
        out.push_str(&format_rational(c.weight()));
        for (&j, &s) in c.indices().iter().zip(c.signs()) {
            write!(out, " {} {}", j + 1, if s > 0 { '+' } else { '-' }).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_instance(text: &str) -> Result<CspInstance> {
    let reader = InstanceReader::new(text.as_bytes())?;
    let (n, predicate) = (reader.n, reader.predicate.clone());
    let constraints = reader.collect::<Result<Vec<_>>>()?;
    CspInstance::new(n, predicate, constraints)
}

/// Streams constraints from a reader without materializing the instance.
pub struct InstanceReader<R> {
    input: R,
    line_no: usize,
    pub n: usize,
    pub m: usize,
    pub predicate: Predicate,
    read: usize,
    done: bool,
}

fn next_line<R: BufRead>(input: &mut R, line_no: &mut usize) -> Result<Option<String>> {
    loop {
        let mut buf = String::new();
        let got = input
            .read_line(&mut buf)
            .map_err(|e| Error::parse(*line_no + 1, e.to_string()))?;
        if got == 0 {
            return Ok(None);
        }
        *line_no += 1;
        if !buf.trim().is_empty() {
            return Ok(Some(buf.trim().to_string()));
        }
    }
}

impl<R: BufRead> InstanceReader<R> {
    pub fn new(mut input: R) -> Result<Self> {
        let mut line_no = 0;
        let header =
            next_line(&mut input, &mut line_no)?.ok_or_else(|| Error::parse(1, "empty input"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let nums = match fields[..] {
            ["cspf", k, n, m] => [k, n, m].map(|t| t.parse::<usize>().ok()),
            _ => return Err(Error::parse(line_no, "expected `cspf k n m`")),
        };
        let [Some(k), Some(n), Some(m)] = nums else {
            return Err(Error::parse(line_no, "bad number in header"));
        };
        let pred_line = next_line(&mut input, &mut line_no)?
            .ok_or_else(|| Error::parse(line_no + 1, "missing predicate line"))?;
        let predicate = Predicate::parse(k, &pred_line).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::parse(line_no, msg),
            other => other,
        })?;
        Ok(Self {
            input,
            line_no,
            n,
            m,
            predicate,
            read: 0,
            done: false,
        })
    }

    pub fn k(&self) -> usize {
        self.predicate.arity()
    }

    fn parse_constraint(&self, line: &str) -> Result<Constraint> {
        let at = self.line_no;
        let k = self.k();
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 1 + 2 * k {
            return Err(Error::parse(
                at,
                format!("expected {} fields, got {}", 1 + 2 * k, tokens.len()),
            ));
        }
        let weight = parse_rational(tokens[0])
            .ok_or_else(|| Error::parse(at, format!("bad weight {:?}", tokens[0])))?;
        let mut indices = Vec::with_capacity(k);
        let mut signs = Vec::with_capacity(k);
        for pair in tokens[1..].chunks(2) {
            let j: usize = pair[0]
                .parse()
                .ok()
                .filter(|&j| j >= 1)
                .ok_or_else(|| Error::parse(at, format!("bad variable {:?}", pair[0])))?;
            indices.push(j - 1);
            signs.push(match pair[1] {
                "+" => 1,
                "-" => -1,
                s => return Err(Error::parse(at, format!("bad sign {s:?}"))),
            });
        }
        let c =
            Constraint::new(indices, signs, weight).map_err(|e| Error::parse(at, e.to_string()))?;
        check_constraint(&c, self.n, k).map_err(|e| Error::parse(at, e.to_string()))?;
        Ok(c)
    }
}

impl<R: BufRead> Iterator for InstanceReader<R> {
    type Item = Result<Constraint>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let line = match next_line(&mut self.input, &mut self.line_no) {
            Ok(l) => l,
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        };
        match line {
            Some(_) if self.read == self.m => {
                self.done = true;
                Some(Err(Error::parse(
                    self.line_no,
                    format!("more than {} constraints", self.m),
                )))
            }
            Some(l) => {
                self.read += 1;
                let c = self.parse_constraint(&l);
                self.done = c.is_err();
                Some(c)
            }
            None if self.read < self.m => {
                self.done = true;
                Some(Err(Error::parse(
                    self.line_no,
                    format!("expected {} constraints, found {}", self.m, self.read),
                )))
            }
            None => {
                self.done = true;
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolean_fn::{maj, LtfSpec};
    use crate::csp::random_instance;
    use crate::rational::rat;

    #[test]
    fn round_trip_is_byte_exact() {
        let inst = random_instance(&Predicate::from_ltf(maj(3)).unwrap(), 9, 25, 3).unwrap();
        let text = write_instance(&inst);
        let back = read_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(write_instance(&back), text);

        let table = Predicate::from_function(inst.function().clone());
        let inst2 = CspInstance::new(9, table, inst.constraints().to_vec()).unwrap();
        let text2 = write_instance(&inst2);
        assert!(text2.lines().nth(1).unwrap().starts_with("table "));
        assert_eq!(write_instance(&read_instance(&text2).unwrap()), text2);
    }

    #[test]
    fn decimal_weights_are_exact() {
        let text = "cspf 2 3 2\nltf 2 0 2 1\n0.25 1 + 3 -\n1/3 2 - 1 +\n";
        let inst = read_instance(text).unwrap();
        assert_eq!(inst.constraints()[0].weight(), &rat(1, 4));
        assert_eq!(inst.constraints()[1].indices(), &[1, 0]);
        assert_eq!(
            write_instance(&inst),
            "cspf 2 3 2\nltf 2 0 2 1\n1/4 1 + 3 -\n1/3 2 - 1 +\n"
        );
        assert_eq!(
            inst.predicate().spec(),
            &crate::csp::PredicateSpec::Ltf(LtfSpec::from_ints(&[2, 1]))
        );
    }

    #[test]
    fn streaming_reader() {
        let text = "cspf 1 2 3\ntable 2\n1 1 +\n1 2 -\n2 1 -\n";
        let reader = InstanceReader::new(text.as_bytes()).unwrap();
        assert_eq!((reader.n, reader.m, reader.k()), (2, 3, 1));
        assert_eq!(reader.filter(|c| c.is_ok()).count(), 3);
    }

    #[test]
    fn malformed_inputs() {
        let bad = [
            "",
            "cspf 3 4\nltf 3 0 1 1 1\n",
            "cspf 3 4 1\nltf 2 0 1 1\n1 1 + 2 + 3 +\n",
            "cspf 3 4 1\nltf 3 0 1 1 1\n1 1 + 2 + 5 +\n",
            "cspf 3 4 1\nltf 3 0 1 1 1\n1 1 + 1 + 2 +\n",
            "cspf 3 4 1\nltf 3 0 1 1 1\n1 1 + 2 * 3 +\n",
            "cspf 3 4 1\nltf 3 0 1 1 1\n-1 1 + 2 + 3 +\n",
            "cspf 3 4 2\nltf 3 0 1 1 1\n1 1 + 2 + 3 +\n",
            "cspf 3 4 1\nltf 3 0 1 1 1\n1 1 + 2 + 3 +\n1 1 + 2 + 3 +\n",
            "cspf 3 4 1\ntable zz\n1 1 + 2 + 3 +\n",
        ];
        for text in bad {
            assert!(read_instance(text).is_err(), "{text:?}");
        }
        match read_instance("cspf 3 4 1\nltf 3 0 1 1 1\n1 0 + 2 + 3 +\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
