//! Submitter country inference from email domains.

/// Placeholder code for documents whose country cannot be determined.
pub const UNKNOWN: &str = "UNKNOWN";

/// ISO 3166-1 alpha-2 codes, lowercase, sorted.
const ISO_ALPHA2: &[&str] = &[
    "ad", "ae", "af", "ag", "ai", "al", "am", "ao", "aq", "ar", "as", "at", "au", "aw", "ax",
    "az", "ba", "bb", "bd", "be", "bf", "bg", "bh", "bi", "bj", "bl", "bm", "bn", "bo", "bq",
    "br", "bs", "bt", "bv", "bw", "by", "bz", "ca", "cc", "cd", "cf", "cg", "ch", "ci", "ck",
    "cl", "cm", "cn", "co", "cr", "cu", "cv", "cw", "cx", "cy", "cz", "de", "dj", "dk", "dm",
    "do", "dz", "ec", "ee", "eg", "eh", "er", "es", "et", "fi", "fj", "fk", "fm", "fo", "fr",
    "ga", "gb", "gd", "ge", "gf", "gg", "gh", "gi", "gl", "gm", "gn", "gp", "gq", "gr", "gs",
    "gt", "gu", "gw", "gy", "hk", "hm", "hn", "hr", "ht", "hu", "id", "ie", "il", "im", "in",
    "io", "iq", "ir", "is", "it", "je", "jm", "jo", "jp", "ke", "kg", "kh", "ki", "km", "kn",
    "kp", "kr", "kw", "ky", "kz", "la", "lb", "lc", "li", "lk", "lr", "ls", "lt", "lu", "lv",
    "ly", "ma", "mc", "md", "me", "mf", "mg", "mh", "mk", "ml", "mm", "mn", "mo", "mp", "mq",
    "mr", "ms", "mt", "mu", "mv", "mw", "mx", "my", "mz", "na", "nc", "ne", "nf", "ng", "ni",
    "nl", "no", "np", "nr", "nu", "nz", "om", "pa", "pe", "pf", "pg", "ph", "pk", "pl", "pm",
    "pn", "pr", "ps", "pt", "pw", "py", "qa", "re", "ro", "rs", "ru", "rw", "sa", "sb", "sc",
    "sd", "se", "sg", "sh", "si", "sj", "sk", "sl", "sm", "sn", "so", "sr", "ss", "st", "sv",
    "sx", "sy", "sz", "tc", "td", "tf", "tg", "th", "tj", "tk", "tl", "tm", "tn", "to", "tr",
    "tt", "tv", "tw", "tz", "ua", "ug", "um", "us", "uy", "uz", "va", "vc", "ve", "vg", "vi",
    "vn", "vu", "wf", "ws", "ye", "yt", "za", "zm", "zw",
];

/// Maps a top-level domain label to an ISO 3166 alpha-2 code.
///
/// Country-code TLDs map to themselves (with `uk` folded to `GB`), `edu`
/// maps to `US`, and every other generic TLD is unknown.
pub fn country_from_tld(tld: &str) -> Option<String> {
    let tld = tld.to_ascii_lowercase();
    match tld.as_str() {
        "uk" => Some("GB".to_string()),
        "edu" => Some("US".to_string()),
        code if ISO_ALPHA2.binary_search(&code).is_ok() => Some(code.to_ascii_uppercase()),
        _ => None,
    }
}

/// Country code for an email address, or [`UNKNOWN`].
pub fn country_from_email(email: &str) -> String {
    let domain = match email.trim().rsplit_once('@') {
        Some((_, domain)) => domain,
        None => return UNKNOWN.to_string(),
    };
    let tld = domain.trim_end_matches('.').rsplit('.').next().unwrap_or("");
    country_from_tld(tld).unwrap_or_else(|| UNKNOWN.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_sorted_and_unique() {
        assert!(ISO_ALPHA2.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cctld_mapping() {
        assert_eq!(country_from_email("x@uni.ac.uk"), "GB");
        assert_eq!(country_from_email("someone@physik.uni-muenchen.de"), "DE");
        assert_eq!(country_from_email("a@ipm.ir"), "IR");
        assert_eq!(country_from_email("a@cornell.edu"), "US");
        assert_eq!(country_from_email("a@gmail.com"), UNKNOWN);
        assert_eq!(country_from_email("a@cern.org"), UNKNOWN);
        assert_eq!(country_from_email("a@example.net"), UNKNOWN);
        assert_eq!(country_from_email("a@host.EU"), UNKNOWN);
        assert_eq!(country_from_email("not-an-email"), UNKNOWN);
        assert_eq!(country_from_email("a@FOO.FR."), "FR");
    }
}
