// SPDX-License-Identifier: Apache-2.0

//! Minimal XML tree, writer helpers, and the request/response envelope.

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XmlError {
    #[error("MalformedXML at byte {position}: {message}")]
    Malformed { position: u64, message: String },
    #[error("SchemaViolation: <{0}>")]
    SchemaViolation(String),
    #[error("UnknownAttribute: `{0}`")]
    UnknownAttribute(String),
}

impl XmlError {
    pub fn schema(element: impl Into<String>) -> Self {
        XmlError::SchemaViolation(element.into())
    }

    /// Short machine name used as a fault code.
    pub fn code(&self) -> &'static str {
        match self {
            XmlError::Malformed { .. } => "MalformedXML",
            XmlError::SchemaViolation(_) => "SchemaViolation",
            XmlError::UnknownAttribute(_) => "UnknownAttribute",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub text: String,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn required_attr(&self, name: &str) -> Result<&str, XmlError> {
        self.attr(name).ok_or_else(|| XmlError::schema(&self.name))
    }

    /// Rejects attributes outside `allowed`.
    pub fn only_attrs(&self, allowed: &[&str]) -> Result<(), XmlError> {
        if self
            .attrs
            .iter()
            .all(|(k, _)| allowed.contains(&k.as_str()))
        {
            Ok(())
        } else {
            Err(XmlError::schema(&self.name))
        }
    }

    pub fn expect_name(&self, name: &str) -> Result<(), XmlError> {
        if self.name == name {
            Ok(())
        } else {
            Err(XmlError::schema(&self.name))
        }
    }

    /// Element must carry no child elements.
    pub fn leaf_text(&self) -> Result<&str, XmlError> {
        if self.children.is_empty() {
            Ok(&self.text)
        } else {
            Err(XmlError::schema(&self.children[0].name))
        }
    }
}

fn malformed(position: u64, message: impl ToString) -> XmlError {
    XmlError::Malformed {
        position,
        message: message.to_string(),
    }
}

fn start_element(reader: &Reader<&[u8]>, e: &BytesStart<'_>) -> Result<Element, XmlError> {
    let pos = reader.buffer_position();
    let name = std::str::from_utf8(e.name().as_ref())
        .map_err(|err| malformed(pos, err))?
        .to_string();
    let mut attrs = Vec::new();
    for a in e.attributes() {
        let a = a.map_err(|err| malformed(pos, err))?;
        let key = std::str::from_utf8(a.key.as_ref())
            .map_err(|err| malformed(pos, err))?
            .to_string();
        if attrs.iter().any(|(k, _): &(String, String)| *k == key) {
            return Err(malformed(pos, format!("duplicate attribute `{key}`")));
        }
        let value = a.unescape_value().map_err(|err| malformed(pos, err))?;
        attrs.push((key, value.into_owned()));
    }
    Ok(Element {
        name,
        attrs,
        ..Element::default()
    })
}

/// Parses a single-rooted document. Whitespace-only text between child
/// elements is dropped.
pub fn parse_document(input: &str) -> Result<Element, XmlError> {
    let mut reader = Reader::from_str(input);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    let attach =
        |stack: &mut Vec<Element>, root: &mut Option<Element>, el: Element, pos| match stack
            .last_mut()
        {
            Some(parent) => {
                parent.children.push(el);
                Ok(())
            }
            None if root.is_none() => {
                *root = Some(el);
                Ok(())
            }
            None => Err(malformed(pos, "multiple root elements")),
        };

    loop {
        let pos = reader.buffer_position();
        let event = reader
            .read_event()
            .map_err(|e| malformed(reader.error_position(), e))?;
        match event {
            Event::Start(e) => {
                if root.is_some() && stack.is_empty() {
                    return Err(malformed(pos, "multiple root elements"));
                }
                stack.push(start_element(&reader, &e)?);
            }
            Event::Empty(e) => {
                let el = start_element(&reader, &e)?;
                attach(&mut stack, &mut root, el, pos)?;
            }
            Event::End(_) => {
                let el = stack
                    .pop()
                    .ok_or_else(|| malformed(pos, "unbalanced end tag"))?;
                attach(&mut stack, &mut root, el, pos)?;
            }
            Event::Text(t) => {
                let text = t.unescape().map_err(|e| malformed(pos, e))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&text),
                    None if text.trim().is_empty() => {}
                    None => return Err(malformed(pos, "text outside root element")),
                }
            }
            Event::CData(c) => {
                let bytes = c.into_inner();
                let text = std::str::from_utf8(&bytes).map_err(|e| malformed(pos, e))?;
                match stack.last_mut() {
                    Some(el) => el.text.push_str(text),
                    None => return Err(malformed(pos, "CDATA outside root element")),
                }
            }
            Event::Decl(_) | Event::Comment(_) | Event::PI(_) => {}
            Event::DocType(_) => return Err(malformed(pos, "DOCTYPE is not accepted")),
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err(malformed(input.len() as u64, "unexpected end of document"));
    }
    let mut root = root.ok_or_else(|| malformed(0, "empty document"))?;
    strip_inter_element_whitespace(&mut root);
    Ok(root)
}

fn strip_inter_element_whitespace(el: &mut Element) {
    if !el.children.is_empty() && el.text.trim().is_empty() {
        el.text.clear();
    }
    for c in &mut el.children {
        strip_inter_element_whitespace(c);
    }
}

pub fn escape(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

/// `<name a="v" ...>inner</name>`, attributes escaped, `inner` verbatim.
pub fn element(name: &str, attrs: &[(&str, &str)], inner: &str) -> String {
    let mut out = String::with_capacity(inner.len() + 32);
    out.push('<');
    out.push_str(name);
    push_attrs(&mut out, attrs);
    out.push('>');
    out.push_str(inner);
    out.push_str("</");
    out.push_str(name);
    out.push('>');
    out
}

/// `<name>text</name>` with `text` escaped.
pub fn text_element(name: &str, text: &str) -> String {
    element(name, &[], &escape(text))
}

/// `<name a="v" .../>`
pub fn empty_element(name: &str, attrs: &[(&str, &str)]) -> String {
    let mut out = String::from("<");
    out.push_str(name);
    push_attrs(&mut out, attrs);
    out.push_str("/>");
    out
}

fn push_attrs(out: &mut String, attrs: &[(&str, &str)]) {
    for (k, v) in attrs {
        out.push(' ');
        out.push_str(k);
        out.push_str("=\"");
        out.push_str(&escape(v));
        out.push('"');
    }
}

pub fn envelope(body: &str) -> String {
    format!("<Envelope><Body>{body}</Body></Envelope>")
}

/// Extracts the single payload element of `<Envelope><Body>…</Body></Envelope>`.
pub fn open_envelope(doc: &str) -> Result<Element, XmlError> {
    let root = parse_document(doc)?;
    root.expect_name("Envelope")?;
    root.only_attrs(&[])?;
    let [body] =
        <[Element; 1]>::try_from(root.children).map_err(|_| XmlError::schema("Envelope"))?;
    body.expect_name("Body")?;
    let [payload] =
        <[Element; 1]>::try_from(body.children).map_err(|_| XmlError::schema("Body"))?;
    Ok(payload)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fault {
    pub code: String,
    pub reason: String,
}

impl Fault {
    pub fn new(code: impl Into<String>, reason: impl Into<String>) -> Self {
        Fault {
            code: code.into(),
            reason: reason.into(),
        }
    }

    pub fn to_xml(&self) -> String {
        element(
            "Fault",
            &[],
            &(text_element("Code", &self.code) + &text_element("Reason", &self.reason)),
        )
    }

    pub fn from_element(el: &Element) -> Result<Self, XmlError> {
        el.expect_name("Fault")?;
        let mut code = None;
        let mut reason = None;
        for c in &el.children {
            match c.name.as_str() {
                "Code" => code = Some(c.leaf_text()?.to_string()),
                "Reason" => reason = Some(c.leaf_text()?.to_string()),
                other => return Err(XmlError::schema(other)),
            }
        }
        Ok(Fault {
            code: code.ok_or_else(|| XmlError::schema("Fault"))?,
            reason: reason.unwrap_or_default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_tree() {
        let doc = r#"<?xml version="1.0"?>
            <A x="1"><B>hi &amp; bye</B>
              <C y="&lt;q&gt;"/></A>"#;
        let root = parse_document(doc).unwrap();
        assert_eq!(root.name, "A");
        assert_eq!(root.attr("x"), Some("1"));
        assert_eq!(root.text, "");
        assert_eq!(root.children[0].text, "hi & bye");
        assert_eq!(root.children[1].attr("y"), Some("<q>"));
    }

    #[test]
    fn malformed_reports_position() {
        for bad in [
            "<A><B></A>",
            "<A>",
            "",
            "<A/><B/>",
            "<A x='1' x='2'/>",
            "text",
        ] {
            match parse_document(bad) {
                Err(XmlError::Malformed { .. }) => {}
                other => panic!("{bad:?} gave {other:?}"),
            }
        }
        let Err(XmlError::Malformed { position, .. }) = parse_document("<A><B></C></A>") else {
            panic!()
        };
        assert!(position > 0);
    }

    #[test]
    fn writer_escapes() {
        assert_eq!(
            element("A", &[("k", "a\"b")], &text_element("B", "1 < 2")),
            "<A k=\"a&quot;b\"><B>1 &lt; 2</B></A>"
        );
        assert_eq!(empty_element("C", &[]), "<C/>");
    }

    #[test]
    fn envelope_round_trip() {
        let doc = envelope(&empty_element("Ping", &[("n", "1")]));
        let payload = open_envelope(&doc).unwrap();
        assert_eq!(payload.name, "Ping");
        assert!(matches!(
            open_envelope("<Envelope><Head/></Envelope>"),
            Err(XmlError::SchemaViolation(_))
        ));
        assert!(matches!(
            open_envelope("<Envelope><Body><A/><B/></Body></Envelope>"),
            Err(XmlError::SchemaViolation(_))
        ));
        assert!(matches!(
            open_envelope("<Envelope><Body>"),
            Err(XmlError::Malformed { .. })
        ));
    }

    #[test]
    fn fault_round_trip() {
        let f = Fault::new("DuplicateKey", "svc <1> exists");
        let el = parse_document(&f.to_xml()).unwrap();
        assert_eq!(Fault::from_element(&el).unwrap(), f);
    }
}
