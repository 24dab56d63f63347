"""Website security and privacy benchmarking toolkit.

Scans lists of sites for transport security, mail and DNS hygiene, and
privacy-relevant behavior (trackers, cookies, CDNs, hosting location),
scores the facts under user-defined weighted rating schemes, and publishes
rankings through a CLI and a JSON HTTP API.
"""

__version__ = "0.1.0"

USER_AGENT = "SiteGrade/0.1 (benchmark scanner; +https://sitegrade.invalid/about)"
