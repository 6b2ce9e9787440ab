use std::collections::BTreeSet;

use super::{AdjConstraint, ElementaryTree, Grammar, Node, Symbol, TreeKind};
use crate::error::GrammarError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Colon,
    Comma,
    Star,
    Ident(String),
    Quoted(String),
    Newline,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | ':' | ',' | '*' | '"' | '#'))
}

fn lex(text: &str) -> Result<Vec<Token>, GrammarError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let simple = match c {
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ':' => Some(Tok::Colon),
                ',' => Some(Tok::Comma),
                '*' => Some(Tok::Star),
                _ => None,
            };
            if let Some(tok) = simple {
                out.push(Token { tok, line: line_no, col });
                i += 1;
            } else if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c == '"' {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j] != '"' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(syntax(line_no, col, "unterminated terminal"));
                }
                let text: String = chars[start..j].iter().collect();
                if Symbol::new(text.clone()).is_none() {
                    return Err(syntax(line_no, col, format!("invalid terminal {text:?}")));
                }
                out.push(Token { tok: Tok::Quoted(text), line: line_no, col });
                i = j + 1;
            } else {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(text), line: line_no, col });
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            line: line_no,
            col: chars.len() + 1,
        });
    }
    Ok(out)
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> GrammarError {
    GrammarError::Syntax { line, col, msg: msg.into() }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_skipping_newlines(&self) -> Option<&Tok> {
        self.toks[self.pos..]
            .iter()
            .map(|t| &t.tok)
            .find(|t| **t != Tok::Newline)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn error(&self, msg: impl Into<String>) -> GrammarError {
        let (line, col) = self.here();
        syntax(line, col, msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn skip_newlines(&mut self) {
        while self.peek() == Some(&Tok::Newline) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), GrammarError> {
        self.skip_newlines();
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, GrammarError> {
        self.skip_newlines();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn label(&mut self) -> Result<Symbol, GrammarError> {
        let text = self.ident("node label")?;
        Symbol::new(text).ok_or_else(|| self.error("invalid label"))
    }

    fn constraint(&mut self) -> Result<AdjConstraint, GrammarError> {
        if self.peek() != Some(&Tok::Colon) {
            return Ok(AdjConstraint::AnyMatching);
        }
        self.pos += 1;
        match self.ident("`na` or `adj(...)`")?.as_str() {
            "na" => Ok(AdjConstraint::Null),
            "adj" => {
                self.expect(Tok::LParen, "`(` after `adj`")?;
                let mut names = BTreeSet::new();
                names.insert(self.ident("auxiliary tree name")?);
                loop {
                    self.skip_newlines();
                    match self.next() {
                        Some(Tok::Comma) => {
                            names.insert(self.ident("auxiliary tree name")?);
                        }
                        Some(Tok::RParen) => break,
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("expected `,` or `)` in adj list"));
                        }
                    }
                }
                Ok(AdjConstraint::Selective(names))
            }
            other => {
                self.pos -= 1;
                Err(self.error(format!("unknown constraint `{other}`")))
            }
        }
    }

    /// `"(" LABEL ["*"] [constraint] { child } ")"`, or the epsilon leaf `()`;
    /// the opening parenthesis has already been consumed.
    fn node_after_lparen(&mut self) -> Result<Node, GrammarError> {
        self.skip_newlines();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(Node::Epsilon);
        }
        let label = self.label()?;
        if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let constraint = self.constraint()?;
            self.skip_newlines();
            if self.peek() != Some(&Tok::RParen) {
                return Err(self.error("foot node must be a leaf"));
            }
            self.pos += 1;
            return Ok(Node::Foot { label, constraint });
        }
        let constraint = self.constraint()?;
        let mut children = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek() {
                Some(Tok::RParen) => {
                    self.pos += 1;
                    break;
                }
                None => return Err(self.error("unbalanced parentheses")),
                _ => children.push(self.child()?),
            }
        }
        Ok(Node::Interior {
            label,
            constraint,
            children,
        })
    }

    fn child(&mut self) -> Result<Node, GrammarError> {
        self.skip_newlines();
        match self.next() {
            Some(Tok::LParen) => self.node_after_lparen(),
            Some(Tok::Quoted(t)) => Ok(Node::Terminal(Symbol(t))),
            Some(Tok::Ident(text)) => {
                let label = Symbol::new(text).ok_or_else(|| self.error("invalid label"))?;
                if self.peek() != Some(&Tok::Star) {
                    self.pos -= 1;
                    return Err(self.error(format!(
                        "bare label `{label}`: write a subtree `({label} ...)`, a foot `{label}*` or a quoted terminal"
                    )));
                }
                self.pos += 1;
                let constraint = self.constraint()?;
                Ok(Node::Foot { label, constraint })
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a child node"))
            }
        }
    }

    fn end_of_line(&mut self) -> Result<(), GrammarError> {
        match self.peek() {
            Some(Tok::Newline) | None => Ok(()),
            _ => Err(self.error("unexpected trailing input")),
        }
    }
}

/// Parses the textual grammar format.
pub fn parse_grammar_text(text: &str) -> Result<Grammar, GrammarError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut start: Option<Symbol> = None;
    let mut trees: Vec<ElementaryTree> = Vec::new();
    loop {
        p.skip_newlines();
        let (line, col) = p.here();
        let Some(tok) = p.next() else { break };
        let keyword = match tok {
            Tok::Ident(k) => k,
            _ => return Err(syntax(line, col, "expected `start`, `initial` or `aux`")),
        };
        match keyword.as_str() {
            "start" => {
                if start.is_some() {
                    return Err(syntax(line, col, "duplicate `start` declaration"));
                }
                start = Some(p.label()?);
                p.end_of_line()?;
            }
            "initial" | "aux" => {
                let kind = if keyword == "aux" {
                    TreeKind::Auxiliary
                } else {
                    TreeKind::Initial
                };
                let name = p.ident("tree name")?;
                p.expect(Tok::Colon, "`:` after tree name")?;
                p.expect(Tok::LParen, "`(` opening the tree")?;
                if p.peek_skipping_newlines().is_none() {
                    return Err(p.error("unbalanced parentheses"));
                }
                let root = p.node_after_lparen()?;
                p.end_of_line()?;
                trees.push(ElementaryTree::new(name, kind, root)?);
            }
            other => {
                return Err(syntax(
                    line,
                    col,
                    format!("expected `start`, `initial` or `aux`, found `{other}`"),
                ))
            }
        }
    }
    let mut grammar = Grammar::new(start.ok_or(GrammarError::MissingStart)?);
    for tree in trees {
        grammar.insert(tree)?;
    }
    Ok(grammar)
}

/// Parses a single `initial NAME : node` / `aux NAME : node` declaration.
pub fn parse_tree_decl(text: &str) -> Result<ElementaryTree, GrammarError> {
    let g = parse_grammar_text(&format!("start _\n{text}"))?;
    let mut trees = g.trees.into_values();
    match (trees.next(), trees.next()) {
        (Some(t), None) => Ok(t),
        _ => Err(syntax(1, 1, "expected exactly one tree declaration")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grammar::Address;
    use proptest::prelude::*;

    #[test]
    fn parses_g1() {
        let g = parse_grammar_text(fixtures::G1_TEXT).unwrap();
        assert_eq!(g.trees().count(), 2);
        assert_eq!(g.start().as_str(), "S");
        let beta = g.tree("beta").unwrap();
        assert_eq!(beta.foot(), Some(&"2.1".parse::<Address>().unwrap()));
        assert_eq!(beta.foot().unwrap().to_string(), "2.1");
    }

    #[test]
    fn minimal_grammar() {
        let g = parse_grammar_text("start S\ninitial a0 : (S \"e\")").unwrap();
        assert_eq!(g.initial_trees().count(), 1);
        assert_eq!(g.auxiliary_trees().count(), 0);
    }

    #[test]
    fn bare_and_parenthesised_feet_agree() {
        let a = parse_tree_decl("aux b : (S:na \"a\" (S S*:na \"c\"))").unwrap();
        let b = parse_tree_decl("aux b : (S:na \"a\" (S (S*:na) \"c\"))").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn epsilon_and_selective() {
        let g = parse_grammar_text(
            "# comment\nstart S\ninitial a : (S () \"x\")\naux g : (S:adj(g,h) (S*:na))  # trailing\naux h : (S \"y\" (S*:na))",
        )
        .unwrap();
        let a = g.tree("a").unwrap();
        assert_eq!(a.node(&"1".parse().unwrap()), Some(&Node::Epsilon));
        let gt = g.tree("g").unwrap();
        match gt.root().constraint().unwrap() {
            AdjConstraint::Selective(names) => assert_eq!(names.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors() {
        let err = parse_grammar_text("start S\naux b : (S \"a\" (T*))").unwrap_err();
        assert!(err.to_string().contains("foot/root label mismatch"), "{err}");

        let err = parse_grammar_text("start S\ninitial a : (S \"e\")\ninitial a : (S \"f\")").unwrap_err();
        assert_eq!(err, GrammarError::DuplicateTree("a".into()));

        let err = parse_grammar_text("start S\ninitial a : (S S*)").unwrap_err();
        assert_eq!(err, GrammarError::FootInInitial("a".into()));

        let err = parse_grammar_text("start S\naux b : (S S* S*)").unwrap_err();
        assert_eq!(err, GrammarError::MultipleFeet("b".into()));

        let err = parse_grammar_text("start S\naux b : (S \"x\")").unwrap_err();
        assert_eq!(err, GrammarError::MissingFoot("b".into()));

        let err = parse_grammar_text("start S\ninitial a : (S (NP))").unwrap_err();
        assert!(matches!(err, GrammarError::SubstitutionNode { .. }));

        let err = parse_grammar_text("start S\ninitial a : (S \"e\"").unwrap_err();
        assert!(matches!(err, GrammarError::Syntax { .. }), "{err:?}");

        let err = parse_grammar_text("initial a : (S \"e\")").unwrap_err();
        assert_eq!(err, GrammarError::MissingStart);
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_grammar_text("start S\ninitial a (S \"e\")").unwrap_err();
        match err {
            GrammarError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 11)),
            other => panic!("{other:?}"),
        }
        let err = parse_grammar_text("start S\ninitial a : (S e)").unwrap_err();
        match err {
            GrammarError::Syntax { line, col, msg } => {
                assert_eq!((line, col), (2, 16));
                assert!(msg.contains("bare label"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multiline_tree() {
        let g = parse_grammar_text("start S\ninitial a : (S\n   \"x\"\n   \"y\")\n").unwrap();
        assert_eq!(g.tree("a").unwrap().terminals().len(), 2);
    }

    fn arb_label() -> impl Strategy<Value = String> {
        prop::sample::select(vec!["S", "NP", "VP"]).prop_map(String::from)
    }

    fn arb_constraint() -> impl Strategy<Value = String> {
        prop_oneof![
            Just(String::new()),
            Just(":na".to_string()),
            Just(":adj(b0)".to_string()),
            Just(":adj(b0,b1)".to_string()),
        ]
    }

    fn arb_subtree(depth: u32) -> BoxedStrategy<String> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["a", "b", "c"]).prop_map(|t| format!("\"{t}\"")),
            Just("()".to_string()),
        ];
        if depth == 0 {
            return leaf.boxed();
        }
        let inner = (arb_label(), arb_constraint(), prop::collection::vec(arb_subtree(depth - 1), 1..3))
            .prop_map(|(l, c, kids)| format!("({l}{c} {})", kids.join(" ")));
        prop_oneof![leaf, inner].boxed()
    }

    fn arb_grammar_text() -> impl Strategy<Value = String> {
        (
            prop::collection::vec((arb_constraint(), prop::collection::vec(arb_subtree(2), 1..3)), 1..3),
            prop::collection::vec((arb_constraint(), arb_subtree(2), arb_subtree(1)), 0..3),
        )
            .prop_map(|(inits, auxes)| {
                let mut text = String::from("start S\n");
                for (i, (c, kids)) in inits.iter().enumerate() {
                    text += &format!("initial a{i} : (S{c} {})\n", kids.join(" "));
                }
                for (i, (c, left, right)) in auxes.iter().enumerate() {
                    text += &format!("aux b{i} : (S{c} {left} (S*:na) {right})\n");
                }
                text
            })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(text in arb_grammar_text()) {
            let g = parse_grammar_text(&text).unwrap();
            let printed = g.to_string();
            let reparsed = parse_grammar_text(&printed).unwrap();
            prop_assert_eq!(&reparsed, &g);
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}
