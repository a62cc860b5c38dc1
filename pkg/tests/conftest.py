"""Shared fixtures: the hand-built TEI document and fast default limits."""

import pathlib

import pytest

from reviewdesk.ingest import parse_tei

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

MINIMAL_TEI = b"""<?xml version="1.0" encoding="UTF-8"?>
<TEI xmlns="http://www.tei-c.org/ns/1.0">
  <teiHeader><fileDesc><titleStmt><title type="main">Tiny</title></titleStmt></fileDesc></teiHeader>
  <text><body>
    <div><head>Introduction</head>
      <p><s coords="1,10.0,10.0,80.0,10.0">A single sentence introduces the work.</s></p>
    </div>
  </body></text>
</TEI>
"""


@pytest.fixture(scope="session")
def tei_bytes() -> bytes:
    return (FIXTURES / "virtual_studying.tei.xml").read_bytes()


@pytest.fixture()
def doc(tei_bytes):
    return parse_tei(tei_bytes)
