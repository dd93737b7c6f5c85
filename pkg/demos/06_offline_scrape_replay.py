"""Run a full harvest cycle entirely offline from recorded payloads.

Every source client talks to a transport interface; here each gets a
replay transport (or local file) instead of the live API, which is
exactly how the test suite runs. Live mode swaps the transport, nothing
else. Run:  python3 demos/06_offline_scrape_replay.py
"""
import tempfile
from pathlib import Path

from itsrisk.scraper import (
    EpssSource,
    ExploitDbSource,
    FakeClock,
    Harvester,
    NvdSource,
    OtxSource,
    ReplayTransport,
)
from itsrisk.scraper.nvd import NVD_API_URL, PAGE_SIZE
from itsrisk.scraper.otx import OTX_API_URL
from itsrisk.store import VulnStore

from datetime import datetime, timezone

workdir = Path(tempfile.mkdtemp(prefix="itsrisk-demo-"))
clock = FakeClock(datetime(2024, 6, 1, tzinfo=timezone.utc))

# --- record an NVD page, two OTX indicators, a mirror CSV, and an EPSS feed
nvd = ReplayTransport()
nvd.record_json(
    NVD_API_URL,
    {"startIndex": "0", "resultsPerPage": str(PAGE_SIZE)},
    {
        "resultsPerPage": 2, "startIndex": 0, "totalResults": 2,
        "vulnerabilities": [
            {
                "cve": {
                    "id": "CVE-2024-0001",
                    "published": "2024-01-01T00:00:00+00:00",
                    "lastModified": "2024-01-02T00:00:00+00:00",
                    "vulnStatus": "Analyzed",
                    "descriptions": [{"lang": "en", "value": "remote code execution in the gateway"}],
                    "metrics": {"cvssMetricV31": [{"cvssData": {
                        "vectorString": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
                        "baseScore": 9.8}}]},
                    "references": [{"url": "https://example.invalid/fix", "tags": ["Patch"]}],
                    "configurations": [{"nodes": [{"cpeMatch": [
                        {"criteria": "cpe:2.3:o:alphaos:alphaos_os:1.0"}]}]}],
                }
            },
            {
                "cve": {
                    "id": "CVE-2024-0002",
                    "published": "2024-02-01T00:00:00+00:00",
                    "lastModified": "2024-02-02T00:00:00+00:00",
                    "vulnStatus": "Received",
                    "descriptions": [{"lang": "en", "value": "unscored parser crash report"}],
                    "metrics": {},
                }
            },
        ],
    },
)

# the hourly rerun queries the delta window after the stored watermark
nvd.record_json(
    NVD_API_URL,
    {
        "startIndex": "0",
        "resultsPerPage": str(PAGE_SIZE),
        "lastModStartDate": "2024-02-02T00:00:00+00:00",
        "lastModEndDate": "2024-06-01T01:00:00+00:00",
    },
    {"resultsPerPage": 0, "startIndex": 0, "totalResults": 0, "vulnerabilities": []},
)

otx = ReplayTransport()
otx.record_json(
    f"{OTX_API_URL}/indicators/cve/CVE-2024-0001/general", {},
    {"pulse_info": {"count": 2, "pulses": [
        {"id": "pulse-1", "created": "2024-03-01T00:00:00", "tags": ["botnet"]},
        {"id": "pulse-2", "created": "2024-03-02T00:00:00", "tags": []},
    ]}},
)
otx.record_json(f"{OTX_API_URL}/indicators/cve/CVE-2024-0002/general", {}, {}, status=404)

mirror = workdir / "files_exploits.csv"
mirror.write_text(
    "id,file,description,date_published,author,type,platform,port,date_added,"
    "date_updated,verified,codes,tags,aliases,screenshot_url,application_url,source_url\n"
    '7,exploits/gw/7.py,"Gateway RCE PoC",2024-03-01,anon,remote,multiple,0,'
    "2024-03-01,2024-03-01,1,CVE-2024-0001,,,,,\n",
    encoding="utf-8",
)

feed = workdir / "epss.csv"
feed.write_text("cve,epss,percentile\nCVE-2024-0001,0.93,0.99\n", encoding="utf-8")

# --- run the cycle
store = VulnStore(workdir / "store")
harvester = Harvester(
    store,
    [
        NvdSource(nvd, clock, api_key="demo"),
        ExploitDbSource(mirror),
        OtxSource(otx, clock, api_key="demo"),
        EpssSource(feed_path=feed),
    ],
    clock,
)
report = harvester.run_cycle()
print(report.to_table())

print(f"\nstore now holds {store.count()} records at {store.store_dir}")
record = store.get("CVE-2024-0001")
print(f"CVE-2024-0001: patched={record.patched} exploited={record.exploited} "
      f"epss={record.epss} pulses={record.pulse_count}")
print("rerunning one hour later picks up where the cursors left off:")
clock.advance(3600)
print(harvester.run_due().to_table())
