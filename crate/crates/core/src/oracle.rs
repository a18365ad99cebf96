//! Peripheral groups answered by an external process.
//!
//! The process speaks a line protocol over its standard streams. A request
//! `WP <word>` is answered `T` when the word is trivial and `F` otherwise; an
//! optional `NF <word>` request is answered with a canonical word for the
//! same element (an empty line for the identity). Words are space-separated
//! generator names with an optional `^-1` suffix. One request is in flight per
//! channel at any time.
//!
//! Elements are interned: id 0 is the identity and every other id denotes a
//! distinct element, so ids can be compared directly.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use crate::error::{Error, Result};

/// A word in the oracle's generators: `(generator index, inverted)`.
pub type OracleWord = Vec<(u32, bool)>;

struct Channel {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Drop for Channel {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct State {
    channel: Option<Channel>,
    elements: Vec<OracleWord>,
    by_word: HashMap<OracleWord, u32>,
}

pub struct OracleGroup {
    name: String,
    generators: Vec<String>,
    command: Vec<String>,
    normal_form: bool,
    state: Mutex<State>,
}

impl std::fmt::Debug for OracleGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleGroup")
            .field("name", &self.name)
            .field("generators", &self.generators)
            .field("command", &self.command)
            .field("normal_form", &self.normal_form)
            .finish()
    }
}

fn free_reduce(w: &mut OracleWord) {
    let mut out: OracleWord = Vec::with_capacity(w.len());
    for &(g, inv) in w.iter() {
        match out.last() {
            Some(&(h, hinv)) if h == g && hinv != inv => {
                out.pop();
            }
            _ => out.push((g, inv)),
        }
    }
    *w = out;
}

impl OracleGroup {
    pub fn new(name: String, generators: Vec<String>, command: Vec<String>, normal_form: bool) -> Self {
        let mut by_word = HashMap::new();
        by_word.insert(Vec::new(), 0);
        OracleGroup {
            name,
            generators,
            command,
            normal_form,
            state: Mutex::new(State {
                channel: None,
                elements: vec![Vec::new()],
                by_word,
            }),
        }
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn command(&self) -> &[String] {
        &self.command
    }

    pub fn has_normal_form(&self) -> bool {
        self.normal_form
    }

    fn failure(&self, message: impl Into<String>) -> Error {
        Error::OracleFailure {
            peripheral: self.name.clone(),
            message: message.into(),
        }
    }

    pub fn format(&self, w: &OracleWord, sep: &str) -> String {
        w.iter()
            .map(|&(g, inv)| {
                let n = &self.generators[g as usize];
                if inv {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parses generator tokens separated by `sep`.
    pub fn parse(&self, text: &str, sep: char) -> Result<OracleWord> {
        let mut out = Vec::new();
        for tok in text.split(sep).map(str::trim).filter(|t| !t.is_empty()) {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let g = self
                .generators
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| Error::UnknownLetter {
                    context: format!("oracle peripheral `{}`", self.name),
                    token: tok.to_string(),
                })?;
            out.push((g as u32, inv));
        }
        Ok(out)
    }

    fn request(&self, state: &mut State, verb: &str, w: &OracleWord) -> Result<String> {
        if state.channel.is_none() {
            let (prog, args) = self
                .command
                .split_first()
                .ok_or_else(|| self.failure("empty command"))?;
            let mut child = Command::new(prog)
                .args(args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(|e| self.failure(format!("cannot spawn `{prog}`: {e}")))?;
            let stdin = child.stdin.take().unwrap();
            let stdout = BufReader::new(child.stdout.take().unwrap());
            state.channel = Some(Channel {
                child,
                stdin,
                stdout,
            });
        }
        let chan = state.channel.as_mut().unwrap();
        let line = format!("{verb} {}\n", self.format(w, " "));
        chan.stdin
            .write_all(line.as_bytes())
            .and_then(|_| chan.stdin.flush())
            .map_err(|e| self.failure(format!("write failed: {e}")))?;
        let mut answer = String::new();
        let n = chan
            .stdout
            .read_line(&mut answer)
            .map_err(|e| self.failure(format!("read failed: {e}")))?;
        if n == 0 {
            state.channel = None;
            return Err(self.failure("oracle closed its output"));
        }
        Ok(answer.trim_end_matches(['\n', '\r']).to_string())
    }

    fn word_problem(&self, state: &mut State, w: &OracleWord) -> Result<bool> {
        if w.is_empty() {
            return Ok(true);
        }
        match self.request(state, "WP", w)?.trim() {
            "T" => Ok(true),
            "F" => Ok(false),
            other => Err(self.failure(format!("unexpected answer `{other}` to WP"))),
        }
    }

    fn intern_locked(&self, state: &mut State, mut w: OracleWord) -> Result<u32> {
        free_reduce(&mut w);
        if let Some(&id) = state.by_word.get(&w) {
            return Ok(id);
        }
        let key = if self.normal_form {
            let answer = self.request(state, "NF", &w)?;
            let mut nf = self.parse(&answer, ' ')?;
            free_reduce(&mut nf);
            nf
        } else {
            w.clone()
        };
        if let Some(&id) = state.by_word.get(&key) {
            state.by_word.insert(w, id);
            return Ok(id);
        }
        if !self.normal_form {
            if self.word_problem(state, &w)? {
                state.by_word.insert(w, 0);
                return Ok(0);
            }
            for id in 1..state.elements.len() {
                let mut probe = w.clone();
                probe.extend(state.elements[id].iter().rev().map(|&(g, inv)| (g, !inv)));
                if self.word_problem(state, &probe)? {
                    state.by_word.insert(w, id as u32);
                    return Ok(id as u32);
                }
            }
        }
        let id = state.elements.len() as u32;
        state.elements.push(key.clone());
        state.by_word.insert(key, id);
        state.by_word.insert(w, id);
        Ok(id)
    }

    pub fn intern(&self, w: OracleWord) -> Result<u32> {
        let mut state = self.state.lock().unwrap();
        self.intern_locked(&mut state, w)
    }

    pub fn word_of(&self, id: u32) -> OracleWord {
        self.state.lock().unwrap().elements[id as usize].clone()
    }

    pub fn multiply(&self, a: u32, b: u32) -> Result<u32> {
        let mut state = self.state.lock().unwrap();
        let mut w = state.elements[a as usize].clone();
        w.extend_from_slice(&state.elements[b as usize]);
        self.intern_locked(&mut state, w)
    }

    pub fn inverse(&self, a: u32) -> Result<u32> {
        let mut state = self.state.lock().unwrap();
        let w: OracleWord = state.elements[a as usize]
            .iter()
            .rev()
            .map(|&(g, inv)| (g, !inv))
            .collect();
        self.intern_locked(&mut state, w)
    }
}
