#!/usr/bin/env python3
"""Regenerate the hosting-service fixture tree under tests/fixtures/hosting.

The issue lists, readmes, and metadata here are the offline stand-ins for
the three sample repositories the test suite drives against.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "hosting"


def issue(number: int, title: str, body: str, created: str, labels=(), state="open"):
    return {
        "number": number,
        "title": title,
        "body": body,
        "labels": [{"name": name} for name in labels],
        "state": state,
        "created_at": created,
        "updated_at": created,
    }


SHEETABLE_README = """\
# SheetAble

An easy-to-use music sheet organizer for all the music enthusiasts out there.

SheetAble lets you upload, organize, and view your sheet music in one
self-hosted place. Sort uploads by composer, build your own library, and
create accounts for friends or family so everyone can enjoy it together.

## Features

- Upload PDF sheets and organize them by composer
- Create accounts for friends or family
- Access your library from any device: web, [iPad](https://sheetable.net/ipad)
  or Android tablets
- Host it yourself natively or with Docker

## Getting started

Read the [installation guide](docs/installation.md) for native and Docker
setups. Most people are up and running in a few minutes.

Visit the homepage for screenshots and news: https://sheetable.net/

## Contributing

Bug reports and pull requests are welcome on the issue tracker. See
[CONTRIBUTING.md](CONTRIBUTING.md) for the development setup.
"""

SHEETABLE_INSTALL = """\
# Installation

SheetAble ships as a single binary and as a Docker image.

## Docker

```yaml
services:
  sheetable:
    image: sheetable/sheetable:latest
    ports:
      - "8080:8080"
    volumes:
      - ./data:/app/data
```

Run `docker compose up -d` and open http://localhost:8080.

## Native

Download the release archive, unpack it, and run `./sheetable serve`.
The app stores sheets and its database under `./data` by default.

After the first start, log in with the default admin account and create
accounts for the people you share your library with.
"""

SHEETABLE_HOME = """\
<!DOCTYPE html>
<html>
<head><title>SheetAble - Organize your sheet music</title></head>
<body>
<nav><a href="/">Home</a> <a href="/download">Download</a> <a href="/docs">Docs</a></nav>
<main>
<h1>Your sheet music, beautifully organized</h1>
<p>SheetAble is a self-hosted music sheet organizer for enthusiasts,
teachers, and working musicians. Upload PDFs, sort them by composer, and
open them on any device when it is time to play.</p>
<h2>Made for musicians</h2>
<p>Pianists keep their repertoire in one place. Teachers share practice
material with students through their own accounts. Orchestras organize
scores by composer and concert date.</p>
<h2>Private by design</h2>
<p>Install it natively or with Docker on your own server. Your library
stays yours: no subscriptions, no third-party cloud.</p>
<h2>On stage and in the classroom</h2>
<p>The web app works on laptops, iPads, and Android tablets, so your
sheets are ready wherever rehearsal happens.</p>
</main>
<footer><a href="/imprint">Imprint</a> <a href="/privacy">Privacy</a></footer>
</body>
</html>
"""

SHEETABLE_ISSUES = [
    issue(1, "Initial setup fails on Windows", "Setup wizard crashes on the storage step when the data folder is on a network drive.", "2021-04-18T09:12:00Z", ["bug"], state="closed"),
    issue(3, "Add Search bar", "There is no way to search sheets or composers. With more than a few dozen sheets, scrolling is painful.", "2021-05-02T10:00:00Z", ["feature"]),
    issue(5, "Dark mode for the viewer", "Reading sheets at night is hard on the eyes. A dark theme for the app chrome would help.", "2021-05-20T18:42:00Z", ["enhancement"]),
    issue(8, "Tags for sheets", "Composer is the only grouping. I want custom tags like 'warm-up' or 'recital'.", "2021-06-11T08:27:00Z", ["feature"]),
    issue(12, "Sort by upload date", "The library always sorts alphabetically. Newest uploads should be findable quickly.", "2021-07-03T14:05:00Z", ["enhancement"]),
    issue(15, "Bulk upload of PDFs", "Uploading one file at a time is slow when migrating an existing collection of hundreds of sheets.", "2021-08-19T11:54:00Z", ["feature"]),
    issue(19, "Export library as zip", "I would like to download my whole library including metadata as a single archive for backups.", "2021-09-30T16:20:00Z", ["feature"]),
    issue(22, "Shared practice lists", "Let a user assemble a list of sheets and share it with another account.", "2021-11-14T09:48:00Z", ["feature"]),
    issue(26, "Keyboard shortcuts in viewer", "Page turning needs arrow-key support; clicking the small buttons mid-practice is awkward.", "2022-01-21T20:15:00Z", ["enhancement"]),
    issue(29, "Improve login error messages", "A wrong password only says 'error'. Should say what went wrong.", "2022-03-08T07:36:00Z", ["bug"]),
    issue(33, "Typo in settings page", "'Prefrences' should be 'Preferences'.", "2022-04-12T12:00:00Z", ["bug"], state="closed"),
    issue(35, "Docker ARM image", "Please publish an arm64 image so the app runs on a Raspberry Pi.", "2022-05-17T19:02:00Z", ["enhancement"]),
    issue(41, "Auto Scrolling Sheets", "During a performance I cannot take a hand off the instrument. The viewer should scroll sheets automatically at a configurable speed.", "2022-07-25T17:30:00Z", ["feature"]),
    issue(44, "Metronome integration", "A small metronome in the viewer would keep practice sessions in one app.", "2022-09-02T15:11:00Z", ["feature"]),
    issue(47, "Two-page view for tablets", "Landscape tablets show a single page with huge margins. Side-by-side pages would match real music books.", "2022-10-18T10:09:00Z", ["enhancement"]),
    issue(50, "Setlist mode for performances", "Let me queue several sheets in order for a concert and flip through them without going back to the library.", "2022-12-05T21:40:00Z", ["feature"]),
    issue(52, "Offline mode for tablet clients", "Venues often have no reliable wifi. Sheets I open regularly should be cached for offline use.", "2023-01-22T13:26:00Z", ["feature"]),
    issue(55, "Chinese Composer and Sheet Name not supported", "Creating a composer with a Chinese name fails, and sheet names with Chinese characters render as question marks in the library view.", "2023-03-10T08:55:00Z", ["bug"]),
    issue(58, "Remember zoom level per sheet", "Every time I open a sheet I have to zoom in again. The viewer forgets my zoom preference.", "2023-04-27T19:17:00Z", ["enhancement"]),
    issue(61, "Upload progress indicator missing", "Large PDF uploads look stuck because there is no progress bar; several of my students re-uploaded and created duplicates.", "2023-06-13T09:33:00Z", ["bug"]),
    issue(64, "Sheet thumbnails render blank for large PDFs", "PDFs above roughly 50 MB get an empty thumbnail in the library, which makes scores hard to find visually.", "2023-07-29T16:44:00Z", ["bug"]),
    issue(66, "Account invitation emails go to spam", "Invitations sent to my students' school addresses land in spam; several students never found them.", "2023-09-15T07:58:00Z", ["bug"]),
    issue(68, "Composer portraits not loading", "The composer overview shows broken image icons when the portrait scraper finds no picture.", "2023-10-31T22:05:00Z", ["bug"]),
    issue(70, "Annotation layer for practice notes", "I want to scribble fingerings and reminders on a sheet without modifying the original PDF.", "2023-12-17T11:21:00Z", ["feature"]),
    issue(72, "Backup reminder emails", "The app should remind admins to back up the data folder before updates.", "2024-02-02T08:14:00Z", ["enhancement"]),
    issue(74, "PDF rotation is not saved", "Rotating a landscape scan fixes it for the session only; next time it opens sideways again.", "2024-03-20T18:51:00Z", ["bug"]),
    issue(77, "Limit on characters when inputting sheet and composer name", "Long sheet or composer names overflow the card and cover the sheet thumbnail. There seems to be no length limit enforced anywhere.", "2024-05-06T10:37:00Z", ["bug"]),
    issue(79, "Crash when uploading password-protected PDF", "Uploading an encrypted PDF takes the whole server down with an unhandled exception.", "2024-06-22T14:29:00Z", ["bug"]),
    issue(81, "Filter sheets by difficulty", "Tag sheets as beginner/intermediate/advanced and filter the library by level for lesson planning.", "2024-08-08T09:46:00Z", ["feature"]),
    issue(83, "Student account permissions too broad", "Accounts I create for students can delete sheets from the shared library. They should be read-only by default.", "2024-09-24T15:53:00Z", ["bug"]),
    issue(85, "Sync fails behind reverse proxy", "With the app behind nginx and a path prefix, tablet clients cannot sync; API calls 404.", "2024-11-10T12:08:00Z", ["bug"]),
    issue(87, "Page turn lag on Android tablet", "Page turns take about a second on a mid-range tablet, which is too slow during fast pieces.", "2024-12-27T17:40:00Z", ["bug"]),
    issue(60, "Update dependencies", "Routine dependency bump.", "2023-05-30T10:30:00Z", [], state="closed"),
]

GHOSTSCRIPT_README = """\
# Ghostscript.NET

Ghostscript.NET is a managed wrapper around the native Ghostscript library.
It is designed for integration into software applications that need to
view, rasterize, or process PostScript and PDF documents from .NET code.

## Components

- **GhostscriptViewer** - display PostScript and PDF files in your own UI
- **GhostscriptRasterizer** - convert document pages into raster images
- **GhostscriptProcessor** - run Ghostscript jobs with full argument control

The wrapper can run multiple Ghostscript instances simultaneously, which
makes it suitable for high-throughput server deployments.

## PDF/A-3 conversion and e-invoicing

The library ships helpers for PDF/A-3 conversion and XML invoice embedding.
The samples below show how to produce XRechnung and Factur-X compliant
invoices by attaching the structured XML to the PDF/A-3 container:

```csharp
var processor = new GhostscriptProcessor();
processor.ConvertToPdfA3("invoice.pdf", "invoice-a3.pdf");
processor.EmbedInvoiceXml("invoice-a3.pdf", "xrechnung.xml");
```

## Requirements

The native Ghostscript library (32-bit or 64-bit) must be installed.
"""

GHOSTSCRIPT_ISSUES = [
    issue(12, "Viewer flickers when resizing the window", "GhostscriptViewer repaints the whole page on every resize event.", "2021-08-04T09:10:00Z", ["bug"]),
    issue(30, "Print big PDF dont work correctly", "Printing PDFs above a few hundred pages produces blank pages after page 250 and memory usage climbs until the service is recycled. We process thousands of documents per day.", "2022-02-11T13:22:00Z", ["bug"]),
    issue(47, "Support for Ghostscript 10.x", "The wrapper fails to locate gsdll64.dll from Ghostscript 10 installations.", "2022-09-19T10:02:00Z", ["enhancement"]),
    issue(58, "GhostscriptProcessor hangs on malformed PostScript", "A corrupted input file makes Process() never return instead of raising.", "2023-01-25T16:47:00Z", ["bug"]),
    issue(71, "Rasterizer DPI setting ignored above 600", "Setting CustomDpi higher than 600 silently falls back to 600.", "2023-06-08T11:29:00Z", ["bug"]),
    issue(84, "Add async API for batch conversion", "A Task-based API would let us parallelize invoice conversion without manual thread management.", "2023-11-14T08:51:00Z", ["feature"]),
    issue(92, "Document multi-instance initialization", "The README mentions running multiple instances but there is no sample showing the correct initialization order.", "2024-03-02T14:33:00Z", ["enhancement"]),
    issue(103, "Missing elements/colors when converting PDF to image", "Converting certain PDFs to PNG with GhostscriptRasterizer drops vector elements and shifts colors. The same files convert correctly with the Ghostscript command line tool.", "2024-07-21T09:05:00Z", ["bug"]),
    issue(109, "XRechnung attachment loses custom metadata", "EmbedInvoiceXml drops the invoice profile entry some validators require.", "2024-10-30T15:27:00Z", ["bug"]),
    issue(114, "NuGet package marks wrong native dependency", "Fresh installs restore the x86 native package on x64 build agents.", "2025-01-12T10:58:00Z", ["bug"]),
]

EXCALIDRAW_README = """\
# Excalidraw

Virtual whiteboard for sketching hand-drawn like diagrams.
Collaborative and end-to-end encrypted.

Try it now: https://excalidraw.com
"""


def write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")


def write_json(path: Path, payload) -> None:
    write(path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def main() -> None:
    sheetable = ROOT / "repos" / "SheetAble__SheetAble"
    write_json(sheetable / "repo.json", {
        "stargazers_count": 1289,
        "forks_count": 97,
        "open_issues_count": 30,
        "default_branch": "main",
    })
    write(sheetable / "readme.md", SHEETABLE_README)
    write(sheetable / "raw" / "docs" / "installation.md", SHEETABLE_INSTALL)
    write_json(sheetable / "issues.json", SHEETABLE_ISSUES)
    write(ROOT / "external" / "sheetable.net" / "index.html", SHEETABLE_HOME)
    write(ROOT / "site" / "homepage.html", SHEETABLE_HOME)
    write(
        ROOT / "external" / "sheetable.net" / "features",
        "<html><body><p>Upload sheets, sort by composer, share with accounts, "
        "and read from any tablet. Designed for working musicians.</p></body></html>",
    )
    write(
        ROOT / "external" / "sheetable.net" / "download",
        "<html><body><p>Grab the latest release or pull the Docker image to "
        "host your own sheet library.</p></body></html>",
    )
    write(
        ROOT / "external" / "notes.example" / "review",
        "<html><body><p>A practicing pianist reviews the organizer after a "
        "year of daily rehearsal use.</p></body></html>",
    )

    ghostscript = ROOT / "repos" / "ArtifexSoftware__Ghostscript.NET"
    write_json(ghostscript / "repo.json", {
        "stargazers_count": 511,
        "forks_count": 144,
        "open_issues_count": 10,
        "default_branch": "master",
    })
    write(ghostscript / "readme.md", GHOSTSCRIPT_README)
    write_json(ghostscript / "issues.json", GHOSTSCRIPT_ISSUES)

    excalidraw = ROOT / "repos" / "excalidraw__excalidraw"
    write_json(excalidraw / "repo.json", {
        "stargazers_count": 114476,
        "forks_count": 12158,
        "open_issues_count": 2734,
        "default_branch": "master",
    })
    write(excalidraw / "readme.md", EXCALIDRAW_README)
    write_json(excalidraw / "issues.json", [])

    print(f"fixtures written under {ROOT}")


if __name__ == "__main__":
    main()
