//! CSV ingestion: the message dataset and the collected-chats dataset, both
//! produced by the collection pipeline, become edge events that build the
//! forwarding graph. Rows that fail to parse are quarantined into a rejects
//! report rather than aborting the run.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeDelta, TimeZone, Utc};

use crate::error::{Error, Result};
use crate::graph::{normalize_id, EdgeOutcome, ForwardGraph};

/// One scraped message row.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageRecord {
    pub channel: String,
    pub message_id: i64,
    pub timestamp: DateTime<Utc>,
    /// Origin channel when this message is a forward.
    pub forward_from: Option<String>,
    pub views: u64,
    pub forwards: u64,
    pub replies: u64,
}

/// One row of the collected-chats dataset: a channel discovered via a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRecord {
    pub username: String,
    pub source: String,
    pub collected_at: Option<DateTime<Utc>>,
}

/// Column names for the message dataset. Defaults follow the collection
/// pipeline's export headers.
#[derive(Debug, Clone)]
pub struct MessageColumns {
    pub channel: String,
    pub message_id: String,
    pub timestamp: String,
    pub forward_from: String,
    pub views: String,
    pub forwards: String,
    pub replies: String,
}

impl Default for MessageColumns {
    fn default() -> Self {
        Self {
            channel: "channel_name".to_string(),
            message_id: "message_id".to_string(),
            timestamp: "date".to_string(),
            forward_from: "forward_msg_from_peer_name".to_string(),
            views: "views".to_string(),
            forwards: "forwards".to_string(),
            replies: "replies".to_string(),
        }
    }
}

/// Column names for the collected-chats dataset.
#[derive(Debug, Clone)]
pub struct ChatColumns {
    pub username: String,
    pub source: String,
    /// Optional column; when absent from the header every record is
    /// untimestamped.
    pub collected_at: String,
}

impl Default for ChatColumns {
    fn default() -> Self {
        Self {
            username: "username".to_string(),
            source: "source".to_string(),
            collected_at: "collected_at".to_string(),
        }
    }
}

/// A row that failed to parse: 1-based data row number plus the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedRow {
    pub row: u64,
    pub reason: String,
}

/// A single forwarding event, directed source -> target.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeEvent {
    pub source: String,
    pub target: String,
    pub timestamp: Option<DateTime<Utc>>,
}

/// Timestamps accept RFC 3339 plus a few common timezone-less forms, which
/// are read as UTC. `override_format` replaces the list with one strftime
/// pattern.
pub fn parse_timestamp(raw: &str, override_format: Option<&str>) -> Result<DateTime<Utc>> {
    let raw = raw.trim();
    if let Some(fmt) = override_format {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(Utc.from_utc_datetime(&dt));
        }
        if let Ok(d) = NaiveDate::parse_from_str(raw, fmt) {
            return Ok(Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).unwrap()));
        }
        return Err(Error::Parse(format!(
            "timestamp {raw:?} does not match format {fmt:?}"
        )));
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S%z", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(Utc.from_utc_datetime(&dt));
        }
        if let Ok(dt) = DateTime::parse_from_str(raw, fmt) {
            return Ok(dt.with_timezone(&Utc));
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).unwrap()));
    }
    Err(Error::Parse(format!("unparseable timestamp {raw:?}")))
}

fn header_index(
    headers: &csv::StringRecord,
    column: &str,
    file: &str,
    required: bool,
) -> Result<Option<usize>> {
    match headers.iter().position(|h| h == column) {
        Some(i) => Ok(Some(i)),
        None if required => Err(Error::MissingColumn {
            file: file.to_string(),
            column: column.to_string(),
        }),
        None => Ok(None),
    }
}

fn count_field(record: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<u64, String> {
    let raw = record.get(idx).unwrap_or("").trim();
    if raw.is_empty() {
        return Ok(0);
    }
    // Exports sometimes render counts as floats ("12.0").
    raw.parse::<u64>()
        .or_else(|_| {
            raw.parse::<f64>()
                .map_err(|_| ())
                .and_then(|v| {
                    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 {
                        Ok(v as u64)
                    } else {
                        Err(())
                    }
                })
        })
        .map_err(|_| format!("{name} value {raw:?} is not a non-negative integer"))
}

/// Parses the message dataset. Malformed rows land in the rejects list with
/// their 1-based data row number; parsing continues.
pub fn read_messages<R: Read>(
    input: R,
    columns: &MessageColumns,
    time_format: Option<&str>,
) -> Result<(Vec<MessageRecord>, Vec<RejectedRow>)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    let file = "messages CSV";
    let channel = header_index(&headers, &columns.channel, file, true)?.unwrap();
    let timestamp = header_index(&headers, &columns.timestamp, file, true)?.unwrap();
    let forward_from = header_index(&headers, &columns.forward_from, file, true)?.unwrap();
    let message_id = header_index(&headers, &columns.message_id, file, false)?;
    let views = header_index(&headers, &columns.views, file, false)?;
    let forwards = header_index(&headers, &columns.forwards, file, false)?;
    let replies = header_index(&headers, &columns.replies, file, false)?;

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i as u64 + 1;
        let reject = |reason: String, rejects: &mut Vec<RejectedRow>| {
            rejects.push(RejectedRow { row, reason });
        };
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                reject(format!("unreadable row: {e}"), &mut rejects);
                continue;
            }
        };
        let channel_raw = record.get(channel).unwrap_or("").trim();
        if normalize_id(channel_raw).is_err() {
            reject(format!("empty channel name {channel_raw:?}"), &mut rejects);
            continue;
        }
        let ts = match parse_timestamp(record.get(timestamp).unwrap_or(""), time_format) {
            Ok(ts) => ts,
            Err(e) => {
                reject(e.to_string(), &mut rejects);
                continue;
            }
        };
        let fwd_raw = record.get(forward_from).unwrap_or("").trim();
        let fwd = if fwd_raw.is_empty() {
            None
        } else if normalize_id(fwd_raw).is_ok() {
            Some(fwd_raw.to_string())
        } else {
            reject(
                format!("forward origin {fwd_raw:?} is empty after normalization"),
                &mut rejects,
            );
            continue;
        };
        let msg_id = match message_id {
            None => 0,
            Some(idx) => {
                let raw = record.get(idx).unwrap_or("").trim();
                if raw.is_empty() {
                    0
                } else {
                    match raw.parse::<i64>() {
                        Ok(v) => v,
                        Err(_) => {
                            reject(format!("message id {raw:?} is not an integer"), &mut rejects);
                            continue;
                        }
                    }
                }
            }
        };
        let mut counts = [0u64; 3];
        let mut bad = None;
        for (slot, (idx, name)) in counts.iter_mut().zip([
            (views, "views"),
            (forwards, "forwards"),
            (replies, "replies"),
        ]) {
            if let Some(idx) = idx {
                match count_field(&record, idx, name) {
                    Ok(v) => *slot = v,
                    Err(reason) => {
                        bad = Some(reason);
                        break;
                    }
                }
            }
        }
        if let Some(reason) = bad {
            reject(reason, &mut rejects);
            continue;
        }
        records.push(MessageRecord {
            channel: channel_raw.to_string(),
            message_id: msg_id,
            timestamp: ts,
            forward_from: fwd,
            views: counts[0],
            forwards: counts[1],
            replies: counts[2],
        });
    }
    Ok((records, rejects))
}

/// Parses the collected-chats dataset.
pub fn read_chats<R: Read>(
    input: R,
    columns: &ChatColumns,
    time_format: Option<&str>,
) -> Result<(Vec<ChatRecord>, Vec<RejectedRow>)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    let file = "chats CSV";
    let username = header_index(&headers, &columns.username, file, true)?.unwrap();
    let source = header_index(&headers, &columns.source, file, true)?.unwrap();
    let collected_at = header_index(&headers, &columns.collected_at, file, false)?;

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i as u64 + 1;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rejects.push(RejectedRow {
                    row,
                    reason: format!("unreadable row: {e}"),
                });
                continue;
            }
        };
        let user_raw = record.get(username).unwrap_or("").trim();
        let source_raw = record.get(source).unwrap_or("").trim();
        if normalize_id(user_raw).is_err() || normalize_id(source_raw).is_err() {
            rejects.push(RejectedRow {
                row,
                reason: format!(
                    "username {user_raw:?} or source {source_raw:?} empty after normalization"
                ),
            });
            continue;
        }
        let ts = match collected_at {
            None => None,
            Some(idx) => {
                let raw = record.get(idx).unwrap_or("").trim();
                if raw.is_empty() {
                    None
                } else {
                    match parse_timestamp(raw, time_format) {
                        Ok(ts) => Some(ts),
                        Err(e) => {
                            rejects.push(RejectedRow {
                                row,
                                reason: e.to_string(),
                            });
                            continue;
                        }
                    }
                }
            }
        };
        records.push(ChatRecord {
            username: user_raw.to_string(),
            source: source_raw.to_string(),
            collected_at: ts,
        });
    }
    Ok((records, rejects))
}

/// Edge events for forwards incoming into scraped channels: origin ->
/// posting channel. Non-forward messages emit nothing.
pub fn incoming_events(records: &[MessageRecord]) -> Vec<EdgeEvent> {
    records
        .iter()
        .filter_map(|r| {
            r.forward_from.as_ref().map(|origin| EdgeEvent {
                source: origin.clone(),
                target: r.channel.clone(),
                timestamp: Some(r.timestamp),
            })
        })
        .collect()
}

/// Edge events for forwards outgoing from seed channels: seed -> discovered
/// channel.
pub fn outgoing_events(records: &[ChatRecord]) -> Vec<EdgeEvent> {
    records
        .iter()
        .map(|r| EdgeEvent {
            source: r.source.clone(),
            target: r.username.clone(),
            timestamp: r.collected_at,
        })
        .collect()
}

/// Result of temporal filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredEvents {
    pub kept: Vec<EdgeEvent>,
    /// Events with a timestamp strictly before the cutoff.
    pub dropped_before_cutoff: usize,
    /// Events kept despite having no timestamp at all.
    pub untimestamped_kept: usize,
}

/// Retains events with `timestamp >= cutoff`. Events without timestamps are
/// kept and counted so the gap stays visible.
pub fn temporal_filter(events: Vec<EdgeEvent>, cutoff: DateTime<Utc>) -> FilteredEvents {
    let mut kept = Vec::with_capacity(events.len());
    let mut dropped = 0;
    let mut untimestamped = 0;
    for event in events {
        match event.timestamp {
            Some(ts) if ts < cutoff => dropped += 1,
            Some(_) => kept.push(event),
            None => {
                untimestamped += 1;
                kept.push(event);
            }
        }
    }
    FilteredEvents {
        kept,
        dropped_before_cutoff: dropped,
        untimestamped_kept: untimestamped,
    }
}

/// Folds edge events into a graph. `seeds` are marked after all nodes exist;
/// self-loops are dropped and tallied by the graph itself.
pub fn build_graph(events: &[EdgeEvent], seeds: &HashSet<String>) -> Result<ForwardGraph> {
    let mut g = ForwardGraph::new();
    for event in events {
        let _: EdgeOutcome = g.add_edge(&event.source, &event.target)?;
    }
    for seed in seeds {
        g.mark_seed(seed)?;
    }
    Ok(g)
}

/// Per-channel engagement aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct EngagementSummary {
    pub channel: String,
    pub messages: u64,
    pub avg_forwards_per_message: f64,
    pub avg_views_per_message: f64,
    pub replies_per_10_messages: f64,
    /// Share of the channel's messages that are forwards, in [0, 1].
    pub forward_fraction: f64,
}

/// Aggregates engagement per channel. When `channels` is given, only those
/// channels are reported; channels with zero messages are omitted either way.
/// Output is sorted by channel id.
pub fn engagement_summary(
    records: &[MessageRecord],
    channels: Option<&HashSet<String>>,
) -> Result<Vec<EngagementSummary>> {
    struct Acc {
        messages: u64,
        views: u64,
        forwards: u64,
        replies: u64,
        forwarded_messages: u64,
    }
    let mut by_channel: BTreeMap<String, Acc> = BTreeMap::new();
    for r in records {
        let id = normalize_id(&r.channel)?;
        if let Some(filter) = channels {
            if !filter.contains(&id) {
                continue;
            }
        }
        let acc = by_channel.entry(id).or_insert(Acc {
            messages: 0,
            views: 0,
            forwards: 0,
            replies: 0,
            forwarded_messages: 0,
        });
        acc.messages += 1;
        acc.views += r.views;
        acc.forwards += r.forwards;
        acc.replies += r.replies;
        if r.forward_from.is_some() {
            acc.forwarded_messages += 1;
        }
    }
    Ok(by_channel
        .into_iter()
        .map(|(channel, acc)| {
            let n = acc.messages as f64;
            EngagementSummary {
                channel,
                messages: acc.messages,
                avg_forwards_per_message: acc.forwards as f64 / n,
                avg_views_per_message: acc.views as f64 / n,
                replies_per_10_messages: 10.0 * acc.replies as f64 / n,
                forward_fraction: acc.forwarded_messages as f64 / n,
            }
        })
        .collect())
}

/// Message counts per time bucket covering `[min timestamp, max timestamp]`,
/// with empty buckets emitted as zero. Buckets are aligned to multiples of
/// the bucket width since the Unix epoch, so daily buckets are calendar UTC
/// days. An empty record stream yields an empty series.
pub fn posting_frequency(
    records: &[MessageRecord],
    bucket: TimeDelta,
) -> Result<Vec<(DateTime<Utc>, u64)>> {
    let width = bucket.num_seconds();
    if width <= 0 {
        return Err(Error::InvalidArgument(format!(
            "bucket width must be positive, got {bucket}"
        )));
    }
    if records.is_empty() {
        return Ok(Vec::new());
    }
    let bucket_of = |ts: DateTime<Utc>| ts.timestamp().div_euclid(width);
    let lo = records.iter().map(|r| bucket_of(r.timestamp)).min().unwrap();
    let hi = records.iter().map(|r| bucket_of(r.timestamp)).max().unwrap();
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for r in records {
        counts[(bucket_of(r.timestamp) - lo) as usize] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let start = (lo + i as i64) * width;
            (Utc.timestamp_opt(start, 0).unwrap(), c)
        })
        .collect())
}

/// Writes the rejects report as `row,reason` CSV with a `file` column when
/// several inputs feed one report.
pub fn write_rejects_csv<W: Write>(
    rejects: &[(String, RejectedRow)],
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["file", "row", "reason"])?;
    for (file, r) in rejects {
        wtr.write_record([file.clone(), r.row.to_string(), r.reason.clone()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes engagement summaries as CSV.
pub fn write_engagement_csv<W: Write>(rows: &[EngagementSummary], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "channel",
        "messages",
        "avg_forwards_per_message",
        "avg_views_per_message",
        "replies_per_10_messages",
        "forward_fraction",
    ])?;
    for r in rows {
        wtr.write_record([
            r.channel.clone(),
            r.messages.to_string(),
            r.avg_forwards_per_message.to_string(),
            r.avg_views_per_message.to_string(),
            r.replies_per_10_messages.to_string(),
            r.forward_fraction.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes the posting-frequency series as `bucket_start,count` CSV.
pub fn write_frequency_series_csv<W: Write>(
    series: &[(DateTime<Utc>, u64)],
    w: W,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["bucket_start", "count"])?;
    for (start, count) in series {
        wtr.write_record([start.to_rfc3339(), count.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
