use serde::{Deserialize, Serialize};

use super::{Interface, TraceEvent};

/// One row of the packet-level trace table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub label: String,
    pub route: String,
    pub interface: Interface,
    pub purpose: String,
}

impl TraceRow {
    /// `"<route>, <interface>, <purpose>"`.
    pub fn line(&self) -> String {
        format!("{}, {}, {}", self.route, self.interface, self.purpose)
    }
}

/// Tabulated events in timestamp order, optionally restricted to one interface.
pub fn export_trace_table(trace: &[TraceEvent], interface: Option<Interface>) -> Vec<TraceRow> {
    let mut events: Vec<&TraceEvent> = trace
        .iter()
        .filter(|e| e.tabulated)
        .filter(|e| interface.is_none_or(|i| e.interface == i))
        .collect();
    // stable: equal timestamps keep append order
    events.sort_by_key(|e| e.timestamp_ns);
    events
        .into_iter()
        .map(|e| TraceRow {
            label: e.label.clone(),
            route: format!("{} \u{2192} {}", e.source, e.destination),
            interface: e.interface,
            purpose: e.purpose.clone(),
        })
        .collect()
}

pub fn render_table(rows: &[TraceRow]) -> String {
    let headers = ["ID", "Source \u{2192} Destination", "Interface", "Purpose"];
    let cells: Vec<[String; 4]> = rows
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                r.route.clone(),
                r.interface.to_string(),
                r.purpose.clone(),
            ]
        })
        .collect();
    let mut widths = headers.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let fmt_row = |cols: [&str; 4]| {
        let mut line = String::new();
        for (i, (c, w)) in cols.iter().zip(widths).enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(c);
            if i < 3 {
                line.extend(std::iter::repeat_n(' ', w - c.chars().count()));
            }
        }
        line.trim_end().to_string()
    };
    let mut out = fmt_row(headers);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 6));
    out.push('\n');
    for row in &cells {
        out.push_str(&fmt_row([&row[0], &row[1], &row[2], &row[3]]));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Direction;

    fn ev(label: &str, ts: u64, interface: Interface, tabulated: bool) -> TraceEvent {
        TraceEvent {
            label: label.into(),
            timestamp_ns: ts,
            interface,
            source: "A".into(),
            destination: "B".into(),
            purpose: format!("p-{label}"),
            direction: Direction::Request,
            correlation_id: label.into(),
            operation: "op".into(),
            endpoint: String::new(),
            tabulated,
            run: 1,
            unmatched: false,
        }
    }

    #[test]
    fn empty_trace_gives_empty_table() {
        assert!(export_trace_table(&[], None).is_empty());
    }

    #[test]
    fn rows_follow_timestamps_and_skip_untabulated() {
        let trace = vec![
            ev("M1", 20, Interface::MCP, true),
            ev("A1", 10, Interface::A2A, true),
            ev("C1", 15, Interface::A2A, false),
            ev("S1", 20, Interface::SBI, true),
        ];
        let labels: Vec<_> = export_trace_table(&trace, None)
            .into_iter()
            .map(|r| r.label)
            .collect();
        assert_eq!(labels, ["A1", "M1", "S1"]);
        let sbi = export_trace_table(&trace, Some(Interface::SBI));
        assert_eq!(sbi.len(), 1);
        assert_eq!(sbi[0].line(), "A \u{2192} B, SBI, p-S1");
    }

    #[test]
    fn render_has_header_and_rows() {
        let rows = export_trace_table(&[ev("A1", 1, Interface::A2A, true)], None);
        let text = render_table(&rows);
        assert!(text.starts_with("ID"));
        assert!(text.contains("A1  A \u{2192} B"));
        assert_eq!(text.lines().count(), 3);
    }
}
