from datetime import timedelta

import pytest
from hypothesis import given, strategies as st

from imsi_ibe.errors import ParseError
from imsi_ibe.identity import (
    ExpiryTime,
    IdentityString,
    NetId,
    default_sn_expiry,
    format_imsi,
    hnid,
    is_expired,
    make_identity,
    parse_imsi,
)

MNC = {"244": 2, "310": 3}


def test_parse_two_digit_mnc():
    imsi = parse_imsi("244050000000001", MNC)
    assert (imsi.mcc, imsi.mnc, imsi.msin) == ("244", "05", "0000000001")
    assert hnid(imsi).value == "24405"


def test_parse_three_digit_mnc_and_default():
    assert hnid(parse_imsi("310150123456789", MNC)).value == "310150"
    assert parse_imsi("244050000000001").mnc == "050"
    assert parse_imsi("244050000000001", {244: 2}).mnc == "05"


@pytest.mark.parametrize("bad", ["", "12345", "1234567890123456", "24405abc", "２４４０５００"])
def test_parse_rejects(bad):
    with pytest.raises(ParseError):
        parse_imsi(bad, MNC)


def test_empty_msin():
    assert parse_imsi("2440512", {"244": 2}).msin == "12"
    with pytest.raises(ParseError):
        parse_imsi("244050", {"244": 3})


@given(st.text("0123456789", min_size=6, max_size=15))
def test_format_round_trip(digits):
    assert format_imsi(parse_imsi(digits, {digits[:3]: 2})) == digits


def test_netid():
    assert NetId("24405").value == "24405"
    for bad in ("2440", "2440512", "24a05"):
        with pytest.raises(ParseError):
            NetId(bad)


def test_expiry_text_round_trip_and_order():
    et = ExpiryTime.parse("20250615T235959Z")
    assert et.text == "20250615T235959Z"
    assert et + timedelta(seconds=1) == ExpiryTime.parse("20250616T000000Z")
    assert et < et + timedelta(seconds=1)
    for bad in ("2025-06-15T23:59:59Z", "20250615T235959", "20251315T000000Z"):
        with pytest.raises(ParseError):
            ExpiryTime.parse(bad)


@given(st.datetimes(min_value=__import__("datetime").datetime(2000, 1, 1),
                    max_value=__import__("datetime").datetime(2099, 12, 31)))
def test_default_sn_expiry_is_day_end(dt):
    now = ExpiryTime.parse(dt.strftime("%Y%m%dT%H%M%SZ"))
    et = default_sn_expiry(now)
    assert et.text.endswith("T235959Z") and et.text[:8] == now.text[:8]
    assert not is_expired(et, now)


def test_is_expired_strict():
    et = ExpiryTime.parse("20250615T235959Z")
    assert not is_expired(et, et)
    assert is_expired(et, et + timedelta(seconds=1))


def test_identity_string():
    ident = make_identity("24405", ExpiryTime.parse("20250615T235959Z"))
    assert ident.text == "24405||20250615T235959Z"
    assert IdentityString.parse(ident.text) == ident
    with pytest.raises(ParseError):
        IdentityString.parse("24405|20250615T235959Z")
    with pytest.raises(ParseError):
        make_identity("a||b", ident.expiry)
