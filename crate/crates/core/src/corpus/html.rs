//! Record extraction from saved detail pages.

use scraper::{ElementRef, Html, Node, Selector};

use super::{CorpusError, LawRecord, RecordDate};

/// CSS selectors for each record region of a saved page.
#[derive(Debug, Clone)]
pub struct DoticSelectors {
    /// Element carrying the record id in its `data-id` attribute.
    pub root: String,
    pub title: String,
    pub lead: String,
    pub body: String,
    pub tags: String,
    pub classes: String,
    pub law_type: String,
    pub category: String,
    pub date: String,
}

impl Default for DoticSelectors {
    fn default() -> Self {
        Self {
            root: "article[data-id]".into(),
            title: ".law-title".into(),
            lead: ".law-lead".into(),
            body: ".law-body".into(),
            tags: ".law-tags".into(),
            classes: ".law-classes".into(),
            law_type: ".law-type".into(),
            category: ".law-category".into(),
            date: ".law-date".into(),
        }
    }
}

const BLOCK_TAGS: &[&str] = &[
    "p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "td", "th",
    "table", "section", "blockquote",
];

fn selector(css: &str, region: &str) -> Result<Selector, CorpusError> {
    Selector::parse(css).map_err(|_| CorpusError::StructureMismatch(region.to_string()))
}

/// Text content with block elements separated and whitespace collapsed.
fn plain_text(element: ElementRef<'_>) -> String {
    let mut buf = String::new();
    for node in element.descendants() {
        match node.value() {
            Node::Text(text) => buf.push_str(text),
            Node::Element(e) if BLOCK_TAGS.contains(&e.name()) => buf.push(' '),
            _ => {}
        }
    }
    buf.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn list_items(element: ElementRef<'_>) -> Vec<String> {
    let item = Selector::parse("li, a, span").expect("static selector");
    let items: Vec<String> = element
        .select(&item)
        .filter(|e| !e.children().any(|c| c.value().is_element()))
        .map(plain_text)
        .filter(|t| !t.is_empty())
        .collect();
    if items.is_empty() {
        // Bare comma-separated list.
        plain_text(element)
            .split([',', '،'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    } else {
        items
    }
}

/// Maps one saved detail page onto a [`LawRecord`] using default selectors.
pub fn parse_html_record(html: &str) -> Result<LawRecord, CorpusError> {
    parse_html_record_with(html, &DoticSelectors::default())
}

pub fn parse_html_record_with(
    html: &str,
    selectors: &DoticSelectors,
) -> Result<LawRecord, CorpusError> {
    let doc = Html::parse_document(html);
    let find = |css: &str, region: &str| -> Result<Option<ElementRef<'_>>, CorpusError> {
        Ok(doc.select(&selector(css, region)?).next())
    };
    let require = |css: &str, region: &str| -> Result<ElementRef<'_>, CorpusError> {
        find(css, region)?.ok_or_else(|| CorpusError::StructureMismatch(region.to_string()))
    };

    let root = require(&selectors.root, "id")?;
    let id = root
        .value()
        .attr("data-id")
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CorpusError::StructureMismatch("id".into()))?
        .to_string();
    let title = plain_text(require(&selectors.title, "title")?);
    if title.is_empty() {
        return Err(CorpusError::StructureMismatch("title".into()));
    }
    let content = plain_text(require(&selectors.body, "body")?);
    let lead = find(&selectors.lead, "lead")?
        .map(plain_text)
        .unwrap_or_default();
    let tags = list_items(require(&selectors.tags, "tags")?);
    let classes = list_items(require(&selectors.classes, "classes")?);
    let type_text = plain_text(require(&selectors.law_type, "type")?);
    let law_type = type_text
        .parse()
        .map_err(|value| CorpusError::UnknownLawType { row: 1, value })?;
    let category = plain_text(require(&selectors.category, "category")?);
    let raw_date = plain_text(require(&selectors.date, "date")?);
    let date = RecordDate::parse(&raw_date)?;

    Ok(LawRecord {
        id,
        title,
        content,
        lead,
        tags,
        classes,
        law_type,
        category,
        date,
    })
}
