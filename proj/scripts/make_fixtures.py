"""Writes the small loader fixtures under tests/fixtures."""
import pathlib
import struct

root = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"
root.mkdir(parents=True, exist_ok=True)

pixels = bytes([0, 51, 102, 255, 255, 204, 0, 1])
images = struct.pack(">IIII", 2051, 2, 2, 2) + pixels
labels = struct.pack(">II", 2049, 2) + bytes([7, 3])
(root / "tiny-images-idx3-ubyte").write_bytes(images)
(root / "tiny-labels-idx1-ubyte").write_bytes(labels)
(root / "bad-magic-idx3-ubyte").write_bytes(struct.pack(">IIII", 0xDEADBEEF, 2, 2, 2) + pixels)
(root / "truncated-images-idx3-ubyte").write_bytes(images[:-3])
(root / "three-labels-idx1-ubyte").write_bytes(struct.pack(">II", 2049, 3) + bytes([1, 2, 3]))

har = root / "har"
har.mkdir(exist_ok=True)


def row(i, width=561):
    return " ".join(f"{((i * 37 + k * 11) % 200 - 100) / 100.0:.7e}" for k in range(width))


(har / "X_train.txt").write_text("\n".join("  " + row(i) for i in range(3)) + "\n")
(har / "y_train.txt").write_text("1\n6\n3\n")
(har / "X_test.txt").write_text("\n".join("  " + row(i + 5) for i in range(2)) + "\n")
(har / "y_test.txt").write_text("2\n5\n")
(root / "har-ragged.txt").write_text(row(0) + "\n" + row(1, 560) + "\n")
(root / "har-nonnumeric.txt").write_text(row(0) + "\n" + row(1).replace(" ", " abc ", 1) + "\n")
