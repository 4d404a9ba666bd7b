import itertools
import os
import sys
import unittest

# Add hypercell to sys.path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.air.um_channels import (
    DEFAULT_CHANNELS, FRAME_DURATION_US, FUNCTIONALITY_CHANNELS, PERMITTED_COMBINATIONS,
    SLOT_DURATION_US, CarrierConfig, CarrierViolation, ChannelGroup, FrameTime, Functionality,
    LogicalChannel as C, Role, allowed_roles, downlink_khz, frame_time_at, functionality_roles,
    group_of, is_permitted_combination, next_slot_start, slot_start_time, uplink_khz,
    validate_bs_channels, validate_carrier_pair,
)
from app.errors import RoleMismatchError

SBS_ONLY = {C.FCCH, C.SCH, C.BCCH, C.PCH, C.NCH, C.RACH, C.AGCH}
DBS_ONLY = {C.TCH, C.SACCH, C.FACCH}


class ChannelSplitTests(unittest.TestCase):

    def test_group_of(self):
        """Taxonomy puts FCCH in BCH, RACH in CCCH and TCH on its own."""
        self.assertEqual(group_of(C.FCCH), ChannelGroup.BCH)
        self.assertEqual(group_of(C.RACH), ChannelGroup.CCCH)
        self.assertEqual(group_of(C.TCH), ChannelGroup.TCH_GROUP)
        self.assertEqual(group_of(C.FACCH), ChannelGroup.DCCH)

    def test_allowed_roles_every_channel(self):
        """All 11 channels: BCH/CCCH on the SBS, TCH/SACCH/FACCH on the DBS, SDCCH on both."""
        self.assertEqual(len(C), 11)
        for channel in C:
            roles = allowed_roles(channel)
            if channel in SBS_ONLY:
                self.assertEqual(roles, {Role.SBS}, channel)
            elif channel in DBS_ONLY:
                self.assertEqual(roles, {Role.DBS}, channel)
            else:
                self.assertIs(channel, C.SDCCH)
                self.assertEqual(roles, {Role.SBS, Role.DBS})

    def test_roles_cover_both_stations(self):
        """No channel is unowned and together they cover both roles."""
        union = set()
        for channel in C:
            self.assertTrue(allowed_roles(channel))
            union |= allowed_roles(channel)
        self.assertEqual(union, {Role.SBS, Role.DBS})

    def test_functionality_roles(self):
        """Synchronization, broadcast and paging stay on the SBS; data traffic goes to the DBS."""
        self.assertEqual(functionality_roles(Functionality.PAGING), {Role.SBS})
        self.assertEqual(functionality_roles(Functionality.DATA_TRAFFIC), {Role.DBS})
        self.assertEqual(functionality_roles(Functionality.SYNCHRONIZATION), {Role.SBS})
        self.assertEqual(functionality_roles(Functionality.BROADCASTING), {Role.SBS})

    def test_functionality_channels_agree_with_channel_split(self):
        """Each functionality's channels are allowed on the role that owns the functionality."""
        for functionality, channels in FUNCTIONALITY_CHANNELS.items():
            for role in functionality_roles(functionality):
                self.assertTrue(validate_bs_channels(role, channels).ok, functionality)

    def test_validate_bs_channels(self):
        """Violations are listed once each; the empty set is valid."""
        sbs_set = {C.FCCH, C.SCH, C.BCCH, C.PCH, C.RACH, C.AGCH, C.SDCCH}
        self.assertTrue(validate_bs_channels(Role.SBS, sbs_set).ok)

        result = validate_bs_channels(Role.SBS, [C.TCH, C.TCH])
        self.assertFalse(result.ok)
        self.assertEqual(result.violations, [C.TCH])

        self.assertTrue(validate_bs_channels(Role.DBS, set()).ok)

    def test_default_channel_sets_are_legal(self):
        """The per-role defaults pass their own role's check."""
        for role, channels in DEFAULT_CHANNELS.items():
            self.assertTrue(validate_bs_channels(role, channels).ok, role)

    def test_permitted_combinations_examples(self):
        """TCH+SACCH and SDCCH+SACCH are permitted, BCCH+TCH is not."""
        self.assertTrue(is_permitted_combination({C.TCH, C.SACCH}))
        self.assertTrue(is_permitted_combination({C.SDCCH, C.SACCH}))
        self.assertTrue(is_permitted_combination({C.TCH, C.SACCH, C.FACCH}))
        self.assertTrue(is_permitted_combination({C.FCCH, C.SCH, C.BCCH, C.PCH, C.NCH, C.RACH, C.AGCH}))
        self.assertFalse(is_permitted_combination({C.BCCH, C.TCH}))

    def test_permitted_combinations_all_subsets(self):
        """Brute force over all 2048 subsets against a literal whitelist."""
        whitelist = [
            {C.TCH, C.SACCH},
            {C.TCH, C.SACCH, C.FACCH},
            {C.FCCH, C.SCH, C.BCCH, C.PCH, C.NCH, C.RACH, C.AGCH},
            {C.SDCCH, C.SACCH},
        ]
        channels = list(C)
        checked = 0
        permitted = 0
        for size in range(len(channels) + 1):
            for subset in itertools.combinations(channels, size):
                expected = set(subset) in whitelist
                self.assertEqual(is_permitted_combination(subset), expected, subset)
                checked += 1
                permitted += expected
        self.assertEqual(checked, 2048)
        self.assertEqual(permitted, 4)

    def test_every_combination_fits_some_role(self):
        """No whitelisted combination mixes SBS-only and DBS-only channels."""
        for combination in PERMITTED_COMBINATIONS:
            self.assertTrue(any(validate_bs_channels(role, combination).ok for role in Role), combination)


class FrameTimingTests(unittest.TestCase):

    def test_slot_start_examples(self):
        """Origin, one slot and one frame."""
        self.assertEqual(slot_start_time(FrameTime(0, 0)), 0)
        self.assertEqual(slot_start_time(FrameTime(0, 1)), 577)
        self.assertEqual(slot_start_time(FrameTime(1, 0)), 4616)

    def test_slot_and_frame_pitch(self):
        """Every slot of frames 0..1000 sits exactly 577 us after the previous one."""
        previous = None
        for frame in range(1001):
            self.assertEqual(slot_start_time(FrameTime(frame, 0)), frame * FRAME_DURATION_US)
            for slot in range(8):
                start = slot_start_time(FrameTime(frame, slot))
                if previous is not None:
                    self.assertEqual(start - previous, SLOT_DURATION_US)
                previous = start
                self.assertEqual(frame_time_at(start), FrameTime(frame, slot))

    def test_frame_time_rejects_bad_slot(self):
        """Slots outside 0..7 and negative frames cannot be built."""
        with self.assertRaises(ValueError):
            FrameTime(0, 8)
        with self.assertRaises(ValueError):
            FrameTime(-1, 0)

    def test_frame_time_at_inside_slot(self):
        """An instant inside a slot maps to that slot."""
        self.assertEqual(frame_time_at(576), FrameTime(0, 0))
        self.assertEqual(frame_time_at(4616 + 3 * 577 + 10), FrameTime(1, 3))

    def test_next_slot_start(self):
        """At or after the given instant, never before."""
        self.assertEqual(next_slot_start(0, 0), 0)
        self.assertEqual(next_slot_start(1, 0), 4616)
        self.assertEqual(next_slot_start(1, 2), 2 * 577)
        self.assertEqual(next_slot_start(4616 + 577, 1), 4616 + 577)


class CarrierTests(unittest.TestCase):

    def sbs(self, arfcn=50, cc=1):
        return CarrierConfig(arfcn=arfcn, color_code=cc, role=Role.SBS)

    def dbs(self, arfcn=60, cc=1):
        return CarrierConfig(arfcn=arfcn, color_code=cc, role=Role.DBS)

    def test_pair_ok(self):
        """Same color code, different ARFCNs."""
        self.assertTrue(validate_carrier_pair(self.sbs(), self.dbs()).ok)

    def test_pair_violations(self):
        """ARFCN collision and color-code mismatch are reported as results."""
        collision = validate_carrier_pair(self.sbs(), self.dbs(arfcn=50))
        self.assertEqual(collision.violations, [CarrierViolation.ARFCN_COLLISION])
        mismatch = validate_carrier_pair(self.sbs(), self.dbs(cc=2))
        self.assertEqual(mismatch.violations, [CarrierViolation.COLOR_CODE_MISMATCH])

    def test_pair_role_mismatch_raises(self):
        """Swapped roles are an input error, not a validation result."""
        with self.assertRaises(RoleMismatchError):
            validate_carrier_pair(self.dbs(), self.sbs())

    def test_color_code_range(self):
        with self.assertRaises(ValueError):
            CarrierConfig(arfcn=1, color_code=8, role=Role.SBS)

    def test_gsm900_frequencies(self):
        """P-GSM and E-GSM ARFCNs map to their carriers; others raise."""
        self.assertEqual(uplink_khz(1), 890_200)
        self.assertEqual(downlink_khz(1), 935_200)
        self.assertEqual(uplink_khz(50), 900_000)
        self.assertEqual(uplink_khz(975), 880_200)
        self.assertEqual(uplink_khz(0), 890_000)
        with self.assertRaises(ValueError):
            uplink_khz(500)


if __name__ == '__main__':
    unittest.main()
