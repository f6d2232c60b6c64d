//! Reference values for the RTVM model, transcribed by hand and frozen.

pub const REFERENCE_ROWS: [&str; 19] = [
    "IN-(a)-IDL",
    "IDL-(b)-TS",
    "TS-(c)-CM",
    "CM-(d)-TS",
    "TS-(e)-OP",
    "TS-(f)-EP",
    "OP-(g)-EP",
    "EP-(h)-IDL",
    "IN-(a)-IDL-(b)-TS",
    "IN-(a)-IDL-(b)-TS-(c)-CM",
    "IN-(a)-IDL-(b)-TS-(c)-CM-(d)-TS",
    "IN-(a)-IDL-(b)-TS-(c)-CM-(d)-TS-(e)-OP",
    "IN-(a)-IDL-(b)-TS-(c)-CM-(d)-TS-(e)-OP-(g)-EP",
    "IN-(a)-IDL-(b)-TS-(c)-CM-(d)-TS-(e)-OP-(g)-EP-(h)-IDL",
    "IN-(a)-IDL-(b)-TS-(e)-OP",
    "IN-(a)-IDL-(b)-TS-(e)-OP-(g)-EP",
    "IN-(a)-IDL-(b)-TS-(e)-OP-(g)-EP-(h)-IDL",
    "IN-(a)-IDL-(b)-TS-(f)-EP",
    "IN-(a)-IDL-(b)-TS-(f)-EP-(h)-IDL",
];

/// Reference covering sets, transcribed row by row (ids as numbers).
pub const REFERENCE_NC: [&[u32]; 19] = [
    &[9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19],
    &[9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19],
    &[10, 11, 12, 13, 14],
    &[11, 12, 13, 14],
    &[12, 13, 14, 15, 16, 17],
    &[18, 19],
    &[13, 14, 16, 17],
    &[14, 17, 19],
    &[10, 11, 12, 13, 14, 15, 16, 17, 18, 19],
    &[11, 12, 13, 14],
    &[12, 13, 14],
    &[13, 14],
    &[14],
    &[],
    &[16],
    &[17],
    &[],
    &[19],
    &[],
];

pub const REFERENCE_PAIRS: [(&str, &str); 12] = [
    ("a", "b"),
    ("b", "c"),
    ("b", "e"),
    ("b", "f"),
    ("c", "d"),
    ("d", "c"),
    ("d", "e"),
    ("d", "f"),
    ("e", "g"),
    ("f", "h"),
    ("g", "h"),
    ("h", "b"),
];
