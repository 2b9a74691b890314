"""Sweep certificate size and ciphertext expansion and report where the byte ordering holds.

The ordinal byte expectations are the only ones that depend on sizes; this
shows how much slack the default sizes leave.
"""

from imsi_ibe.flows import Sizes, check_against_paper, compare_all

BYTE_CHECKS = ("air-bytes-order-first", "air-bytes-order-repeat")


def main():
    certs = (16, 64, 128, 256, 512, 1024)
    cts = (16, 96, 256, 512, 1024)
    print("cert\\ct " + "".join(f"{c:>6d}" for c in cts))
    for cert in certs:
        row = []
        for ct in cts:
            report = {r.name: r.passed for r in check_against_paper(
                compare_all(Sizes(certificate=cert, ciphertext=ct)))}
            row.append("ok" if all(report[n] for n in BYTE_CHECKS) else "--")
        print(f"{cert:8d} " + "".join(f"{c:>6s}" for c in row))


if __name__ == "__main__":
    main()
