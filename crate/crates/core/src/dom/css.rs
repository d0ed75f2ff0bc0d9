//! CSS selector subset used by site wrappers.
//!
//! Supported: type and universal selectors, `#id`, `.class`, `[attr]`,
//! `[attr=value]` (quoted or bare), `:nth-of-type(k)`, the descendant and
//! child (`>`) combinators and comma-separated groups.

use super::{DomError, DomNode, DomTree, NodeId};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Simple {
    Tag(String),
    Id(String),
    Class(String),
    HasAttr(String),
    AttrEq(String, String),
    NthOfType(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Combinator {
    Descendant,
    Child,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct Compound {
    parts: Vec<Simple>,
}

impl Compound {
    fn matches(&self, node: &DomNode) -> bool {
        self.parts.iter().all(|p| match p {
            Simple::Tag(t) => node.tag == *t,
            Simple::Id(id) => node.attr("id") == Some(id.as_str()),
            Simple::Class(c) => node.has_class(c),
            Simple::HasAttr(a) => node.attr(a).is_some(),
            Simple::AttrEq(a, v) => node.attr(a) == Some(v.as_str()),
            Simple::NthOfType(k) => node.sibling_index == *k,
        })
    }
}

/// A complex selector: compounds joined by combinators, stored left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selector {
    compounds: Vec<Compound>,
    combinators: Vec<Combinator>,
}

/// Comma-separated list of selectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectorGroup {
    selectors: Vec<Selector>,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: &str) -> DomError {
        DomError::SelectorSyntax {
            selector: self.src.to_string(),
            position: self.pos,
            reason: reason.to_string(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
        self.pos > start
    }

    fn ident(&mut self) -> Result<String, DomError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_alphanumeric() || c == '-' || c == '_')
        {
            self.bump();
        }
        if self.pos == start {
            return Err(self.err("expected identifier"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn attr_value(&mut self) -> Result<String, DomError> {
        match self.peek() {
            Some(q @ ('"' | '\'')) => {
                self.bump();
                let start = self.pos;
                while self.peek().is_some_and(|c| c != q) {
                    self.bump();
                }
                let value = self.src[start..self.pos].to_string();
                if self.bump() != Some(q) {
                    return Err(self.err("unterminated string"));
                }
                Ok(value)
            }
            _ => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c != ']' && !c.is_whitespace())
                {
                    self.bump();
                }
                if self.pos == start {
                    return Err(self.err("expected attribute value"));
                }
                Ok(self.src[start..self.pos].to_string())
            }
        }
    }

    fn compound(&mut self) -> Result<Compound, DomError> {
        let mut parts = Vec::new();
        let mut any = true;
        match self.peek() {
            Some('*') => {
                self.bump();
            }
            Some(c) if c.is_alphabetic() => parts.push(Simple::Tag(self.ident()?.to_ascii_lowercase())),
            _ => any = false,
        }
        loop {
            match self.peek() {
                Some('#') => {
                    self.bump();
                    parts.push(Simple::Id(self.ident()?));
                }
                Some('.') => {
                    self.bump();
                    parts.push(Simple::Class(self.ident()?));
                }
                Some('[') => {
                    self.bump();
                    self.skip_ws();
                    let name = self.ident()?.to_ascii_lowercase();
                    self.skip_ws();
                    match self.bump() {
                        Some(']') => parts.push(Simple::HasAttr(name)),
                        Some('=') => {
                            self.skip_ws();
                            let value = self.attr_value()?;
                            self.skip_ws();
                            if self.bump() != Some(']') {
                                return Err(self.err("expected ']'"));
                            }
                            parts.push(Simple::AttrEq(name, value));
                        }
                        _ => return Err(self.err("unsupported attribute operator")),
                    }
                }
                Some(':') => {
                    self.bump();
                    let name = self.ident()?;
                    if name != "nth-of-type" {
                        return Err(self.err("unsupported pseudo-class"));
                    }
                    if self.bump() != Some('(') {
                        return Err(self.err("expected '('"));
                    }
                    self.skip_ws();
                    let start = self.pos;
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                    }
                    let k: usize = self.src[start..self.pos]
                        .parse()
                        .map_err(|_| self.err("nth-of-type takes a positive integer"))?;
                    self.skip_ws();
                    if k == 0 || self.bump() != Some(')') {
                        return Err(self.err("nth-of-type takes a positive integer"));
                    }
                    parts.push(Simple::NthOfType(k));
                }
                _ => break,
            }
            any = true;
        }
        if !any {
            return Err(self.err("expected selector"));
        }
        Ok(Compound { parts })
    }

    fn selector(&mut self) -> Result<Selector, DomError> {
        self.skip_ws();
        let mut compounds = vec![self.compound()?];
        let mut combinators = Vec::new();
        loop {
            let had_ws = self.skip_ws();
            match self.peek() {
                None | Some(',') => break,
                Some('>') => {
                    self.bump();
                    self.skip_ws();
                    combinators.push(Combinator::Child);
                }
                Some(_) if had_ws => combinators.push(Combinator::Descendant),
                Some(_) => return Err(self.err("unexpected character")),
            }
            compounds.push(self.compound()?);
        }
        Ok(Selector {
            compounds,
            combinators,
        })
    }
}

impl SelectorGroup {
    pub fn parse(src: &str) -> Result<SelectorGroup, DomError> {
        let mut p = Parser { src, pos: 0 };
        let mut selectors = vec![p.selector()?];
        while p.peek() == Some(',') {
            p.bump();
            selectors.push(p.selector()?);
        }
        if p.peek().is_some() {
            return Err(p.err("trailing input"));
        }
        Ok(SelectorGroup { selectors })
    }

    pub fn matches(&self, tree: &DomTree, id: NodeId) -> bool {
        self.selectors.iter().any(|s| s.matches(tree, id))
    }

    /// All matching nodes in document order.
    pub fn select(&self, tree: &DomTree) -> Vec<NodeId> {
        tree.ids().filter(|id| self.matches(tree, *id)).collect()
    }
}

impl Selector {
    fn matches(&self, tree: &DomTree, id: NodeId) -> bool {
        self.matches_at(tree, id, self.compounds.len() - 1)
    }

    fn matches_at(&self, tree: &DomTree, id: NodeId, idx: usize) -> bool {
        if !self.compounds[idx].matches(tree.node(id)) {
            return false;
        }
        if idx == 0 {
            return true;
        }
        let mut parent = tree.node(id).parent_id;
        match self.combinators[idx - 1] {
            Combinator::Child => parent.is_some_and(|p| self.matches_at(tree, p, idx - 1)),
            Combinator::Descendant => {
                while let Some(p) = parent {
                    if self.matches_at(tree, p, idx - 1) {
                        return true;
                    }
                    parent = tree.node(p).parent_id;
                }
                false
            }
        }
    }
}

/// Nodes matched by `selector`, in document order.
pub fn select_css(tree: &DomTree, selector: &str) -> Result<Vec<NodeId>, DomError> {
    Ok(SelectorGroup::parse(selector)?.select(tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_and_clean;

    fn tree(html: &str) -> DomTree {
        parse_and_clean(html.as_bytes(), "u", "en").unwrap()
    }

    fn tags(t: &DomTree, ids: &[NodeId]) -> Vec<String> {
        ids.iter().map(|i| t.node(*i).tag.clone()).collect()
    }

    #[test]
    fn type_selector_on_minimal_page() {
        let t = tree("<html><body><p> Hello&nbsp;  world </p><script>x</script></body></html>");
        assert_eq!(select_css(&t, "p").unwrap(), vec![NodeId(2)]);
    }

    #[test]
    fn child_combinator_with_class() {
        let t = tree(
            r#"<body><div class="article main"><h1>A</h1><section><h1>B</h1></section></div><div><h1>C</h1></div></body>"#,
        );
        let hits = select_css(&t, "div.article > h1").unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(t.node(hits[0]).text, "A");
        let deep = select_css(&t, "div.article h1").unwrap();
        assert_eq!(deep.len(), 2);
    }

    #[test]
    fn missing_id_is_empty() {
        let t = tree("<body><span id='yes'>x</span></body>");
        assert!(select_css(&t, "span#nope").unwrap().is_empty());
        assert_eq!(select_css(&t, "span#yes").unwrap().len(), 1);
    }

    #[test]
    fn attributes_and_nth_of_type() {
        let t = tree(
            r#"<html><head><meta property="og:title" content="T"><meta name="author" content="Ann"></head>
               <body><ul><li>a</li><li>b</li><li>c</li></ul></body></html>"#,
        );
        let og = select_css(&t, r#"meta[property="og:title"]"#).unwrap();
        assert_eq!(t.node(og[0]).attr("content"), Some("T"));
        assert_eq!(select_css(&t, "meta[property=og:title]").unwrap(), og);
        assert_eq!(select_css(&t, "meta[name]").unwrap().len(), 1);
        let second = select_css(&t, "ul > li:nth-of-type(2)").unwrap();
        assert_eq!(t.node(second[0]).text, "b");
    }

    #[test]
    fn groups_stay_in_document_order() {
        let t = tree("<body><p>1</p><h1>2</h1><p>3</p></body>");
        let ids = select_css(&t, "h1, p").unwrap();
        assert_eq!(tags(&t, &ids), ["p", "h1", "p"]);
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn universal_selector() {
        let t = tree("<body><div><b>x</b><i>y</i></div></body>");
        assert_eq!(select_css(&t, "div > *").unwrap().len(), 2);
    }

    #[test]
    fn unsupported_grammar_is_rejected() {
        for bad in ["p ~ a", "a:hover", "[x^=y]", "p >", "", ",p", "div..a", "p:nth-of-type(0)"] {
            assert!(
                matches!(select_css(&tree("<p>x</p>"), bad), Err(DomError::SelectorSyntax { .. })),
                "{bad}"
            );
        }
    }
}
