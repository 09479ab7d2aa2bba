//! Reader for IEEE 1849 (XES) event logs.
//!
//! Only what the discovery needs is extracted: the `concept:name` of every
//! event in document order and, for filtering, `lifecycle:transition`.

use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{EventLog, EventLogBuilder};
use crate::activity::{is_reserved_label, ActivityId};
use crate::error::LogError;

const NAME_KEY: &[u8] = b"concept:name";
const LIFECYCLE_KEY: &[u8] = b"lifecycle:transition";

#[derive(Debug, Clone, Copy)]
pub struct XesOptions {
    /// Keep only events whose lifecycle is `complete` (events without a
    /// lifecycle attribute are always kept).
    pub complete_only: bool,
}

impl Default for XesOptions {
    fn default() -> Self {
        XesOptions { complete_only: true }
    }
}

#[derive(Default)]
struct PendingEvent {
    name: Option<String>,
    lifecycle: Option<String>,
}

pub fn parse_xes<R: BufRead>(input: R, options: XesOptions) -> Result<EventLog, LogError> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut stack: Vec<Vec<u8>> = Vec::new();
    let mut builder = EventLogBuilder::default();
    let mut trace: Option<Vec<ActivityId>> = None;
    let mut event: Option<PendingEvent> = None;
    let mut trace_index = 0usize;
    let mut event_index = 0usize;

    loop {
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| LogError::Xml(format!("at byte {}: {e}", reader.buffer_position())))?;
        match ev {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(ev, Event::Empty(_));
                let name = e.local_name().as_ref().to_vec();
                let parent = stack.last().map(Vec::as_slice);
                match (parent, name.as_slice()) {
                    (Some(b"log"), b"trace") => {
                        trace = Some(Vec::new());
                        event_index = 0;
                        if is_empty {
                            finish_trace(&mut builder, trace.take())?;
                            trace_index += 1;
                        }
                    }
                    (Some(b"trace"), b"event") if trace.is_some() => {
                        event = Some(PendingEvent::default());
                        if is_empty {
                            return Err(LogError::MissingActivity { trace: trace_index, event: event_index });
                        }
                    }
                    (Some(b"event"), _) => {
                        if let Some(pending) = event.as_mut() {
                            read_attribute(e, pending)?;
                        }
                    }
                    _ => {}
                }
                if !is_empty {
                    stack.push(name);
                }
            }
            Event::End(_) => {
                let name = stack
                    .pop()
                    .ok_or_else(|| LogError::Xml("unbalanced closing tag".into()))?;
                let parent = stack.last().map(Vec::as_slice);
                match (parent, name.as_slice()) {
                    (Some(b"trace"), b"event") => {
                        if let Some(pending) = event.take() {
                            let label = pending
                                .name
                                .ok_or(LogError::MissingActivity { trace: trace_index, event: event_index })?;
                            let keep = !options.complete_only
                                || pending
                                    .lifecycle
                                    .as_deref()
                                    .is_none_or(|l| l.eq_ignore_ascii_case("complete"));
                            if keep {
                                if is_reserved_label(&label) {
                                    return Err(LogError::ReservedLabel { label });
                                }
                                if let Some(t) = trace.as_mut() {
                                    t.push(ActivityId::intern(&label));
                                }
                            }
                            event_index += 1;
                        }
                    }
                    (Some(b"log"), b"trace") => {
                        finish_trace(&mut builder, trace.take())?;
                        trace_index += 1;
                    }
                    _ => {}
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !stack.is_empty() {
        return Err(LogError::Xml("unexpected end of document".into()));
    }
    builder.build()
}

fn finish_trace(builder: &mut EventLogBuilder, trace: Option<Vec<ActivityId>>) -> Result<(), LogError> {
    if let Some(raw) = trace {
        builder.push_raw(&raw, 1)?;
    }
    Ok(())
}

fn read_attribute(e: &BytesStart<'_>, pending: &mut PendingEvent) -> Result<(), LogError> {
    let mut key = None;
    let mut value = None;
    for attr in e.attributes() {
        let attr = attr.map_err(|err| LogError::Xml(err.to_string()))?;
        match attr.key.as_ref() {
            b"key" => key = Some(attr.value.into_owned()),
            b"value" => {
                value = Some(
                    attr.unescape_value()
                        .map_err(|err| LogError::Xml(err.to_string()))?
                        .into_owned(),
                )
            }
            _ => {}
        }
    }
    match key.as_deref() {
        Some(NAME_KEY) => pending.name = value,
        Some(LIFECYCLE_KEY) => pending.lifecycle = value,
        _ => {}
    }
    Ok(())
}

/// Serializes `log` as XES, one `<trace>` per case, without the artificial
/// endpoints. Every event is marked `complete`.
pub fn write_xes<W: std::io::Write>(log: &EventLog, mut out: W) -> std::io::Result<()> {
    use quick_xml::escape::escape;
    writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>")?;
    writeln!(out, "<log xes.version=\"1.0\" xmlns=\"http://www.xes-standard.org/\">")?;
    let mut case = 0u64;
    for v in log.variants() {
        let events: Vec<String> = v.trace.inner().iter().map(|a| escape(a.name().as_ref()).into_owned()).collect();
        for _ in 0..v.count {
            case += 1;
            writeln!(out, "  <trace>\n    <string key=\"concept:name\" value=\"{case}\"/>")?;
            for name in &events {
                writeln!(
                    out,
                    "    <event><string key=\"concept:name\" value=\"{name}\"/><string key=\"lifecycle:transition\" value=\"complete\"/></event>"
                )?;
            }
            writeln!(out, "  </trace>")?;
        }
    }
    writeln!(out, "</log>")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(doc: &str) -> Result<EventLog, LogError> {
        parse_xes(doc.as_bytes(), XesOptions::default())
    }

    fn names(log: &EventLog) -> Vec<(Vec<String>, u64)> {
        log.variants()
            .iter()
            .map(|v| (v.trace.iter().map(|a| a.name().to_string()).collect(), v.count))
            .collect()
    }

    #[test]
    fn merges_identical_traces() {
        let doc = r#"<?xml version="1.0"?>
            <log xes.version="1.0">
              <trace><string key="concept:name" value="c1"/>
                <event><string key="concept:name" value="x"/></event>
              </trace>
              <trace><string key="concept:name" value="c2"/>
                <event><string key="concept:name" value="x"/></event>
              </trace>
            </log>"#;
        let log = parse(doc).unwrap();
        assert_eq!(names(&log), vec![(vec!["▷".into(), "x".into(), "□".into()], 2)]);
    }

    #[test]
    fn zero_traces_is_empty_log() {
        let doc = r#"<log xes.version="1.0"><string key="concept:name" value="l"/></log>"#;
        assert!(matches!(parse(doc), Err(LogError::Empty)));
    }

    #[test]
    fn missing_name_is_reported() {
        let doc = r#"<log><trace><event><date key="time:timestamp" value="2020-01-01T00:00:00"/></event></trace></log>"#;
        assert!(matches!(parse(doc), Err(LogError::MissingActivity { trace: 0, event: 0 })));
    }

    #[test]
    fn malformed_xml_is_reported() {
        let doc = r#"<log><trace><event><string key="concept:name" value="a"/></trace></log>"#;
        assert!(matches!(parse(doc), Err(LogError::Xml(_))));
    }

    #[test]
    fn lifecycle_filter_keeps_complete_events() {
        let doc = r#"<log>
          <global scope="event"><string key="concept:name" value="__INVALID__"/></global>
          <trace>
            <event><string key="concept:name" value="a"/><string key="lifecycle:transition" value="start"/></event>
            <event><string key="concept:name" value="a"/><string key="lifecycle:transition" value="complete"/></event>
            <event><string key="concept:name" value="b &amp; c"/></event>
          </trace></log>"#;
        let log = parse(doc).unwrap();
        assert_eq!(names(&log)[0].0, vec!["▷", "a", "b & c", "□"]);
        let all = parse_xes(doc.as_bytes(), XesOptions { complete_only: false }).unwrap();
        assert_eq!(names(&all)[0].0, vec!["▷", "a", "a", "b & c", "□"]);
    }

    #[test]
    fn nested_attributes_do_not_override_the_name() {
        let doc = r#"<log><trace><event>
            <string key="concept:name" value="a"><string key="concept:name" value="nested"/></string>
          </event></trace></log>"#;
        assert_eq!(names(&parse(doc).unwrap())[0].0, vec!["▷", "a", "□"]);
    }

    #[test]
    fn reserved_label_in_input_is_rejected() {
        let doc = r#"<log><trace><event><string key="concept:name" value="▷"/></event></trace></log>"#;
        assert!(matches!(parse(doc), Err(LogError::ReservedLabel { .. })));
    }

    #[test]
    fn trace_without_events_is_an_empty_case() {
        let doc = r#"<log><trace/><trace></trace></log>"#;
        assert_eq!(names(&parse(doc).unwrap()), vec![(vec!["▷".into(), "□".into()], 2)]);
    }

    #[test]
    fn written_xes_reads_back() {
        let log = EventLog::from_str_traces([(vec!["a", "b&c"], 2), (vec![], 1), (vec!["<x>"], 3)]).unwrap();
        let mut buf = Vec::new();
        write_xes(&log, &mut buf).unwrap();
        let back = parse_xes(buf.as_slice(), XesOptions::default()).unwrap();
        assert_eq!(back, log);
    }
}
