"""Unit-suffix parsing and display formatting."""

import pytest

from bdptune import units


class TestParseRate:
    def test_plain_and_scientific(self):
        assert units.parse_rate("1000000000") == 1e9
        assert units.parse_rate("1e9") == 1e9
        assert units.parse_rate("1E10") == 1e10

    def test_decimal_suffixes(self):
        assert units.parse_rate("10G") == 1e10
        assert units.parse_rate("501M") == 501e6
        assert units.parse_rate("501Mbps") == 501e6
        assert units.parse_rate("10K") == 1e4

    @pytest.mark.parametrize("bad", ["", "fast", "10Q", "-1e9", "0"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            units.parse_rate(bad)


class TestParseBytes:
    def test_plain(self):
        assert units.parse_bytes("87380") == 87380
        assert units.parse_bytes("4096B") == 4096

    def test_decimal_vs_binary(self):
        assert units.parse_bytes("256M") == 256_000_000
        assert units.parse_bytes("1K") == 1000
        assert units.parse_bytes("1Ki") == 1024
        assert units.parse_bytes("16Mi") == 16 * 2**20
        assert units.parse_bytes("4Mi") == 4 * 2**20
        assert units.parse_bytes("1Gi") == 2**30

    def test_fractional_with_suffix(self):
        assert units.parse_bytes("1.5Ki") == 1536

    @pytest.mark.parametrize("bad", ["", "big", "10Qi", "-5"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            units.parse_bytes(bad)


class TestParseTime:
    def test_suffixes(self):
        assert units.parse_time("0.12ms") == 0.12e-3
        assert units.parse_time("1.58ms") == 1.58e-3
        assert units.parse_time("150us") == 150e-6
        assert units.parse_time("2s") == 2.0
        assert units.parse_time("2") == 2.0

    @pytest.mark.parametrize("bad", ["", "1.49xyz", "soon", "-1ms"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            units.parse_time(bad)


class TestFormatting:
    def test_format_bits_decimal_prefixes(self):
        """Bit quantities display with decimal kilo: 699,040 bits reads as 699 Kbit."""
        assert units.format_bits(699040) == "699 Kbit"
        assert units.format_bits(120000) == "120 Kbit"
        assert units.format_bits(15_800_000) == "15.8 Mbit"
        assert units.format_bits(1_490_000) == "1.49 Mbit"

    def test_format_rate(self):
        assert units.format_rate(442430379.7468354) == "442.4 Mbps"
        assert units.format_rate(9.49e9) == "9.49 Gbps"

    def test_format_bytes(self):
        assert units.format_bytes(3952640) == "3,952,640 B"
