"""Converts a two-image triplet listing and feeds the manifest to the CLI."""

import os
import subprocess
import sys
import tempfile

converter, ccstat = sys.argv[1], sys.argv[2]

with tempfile.TemporaryDirectory() as root:
    for name, rgb in (("a", (10, 20, 30)), ("b", (40, 20, 5))):
        os.makedirs(os.path.join(root, "img"), exist_ok=True)
        with open(os.path.join(root, "img", name + ".ppm"), "wb") as handle:
            handle.write(b"P6\n2 2\n255\n" + bytes(rgb) * 4)
    with open(os.path.join(root, "list.txt"), "w") as handle:
        handle.write("img/a.ppm\nimg/b.ppm\n")
    with open(os.path.join(root, "truth.txt"), "w") as handle:
        handle.write("30 20 10\n5, 20, 40\n")
    with open(os.path.join(root, "folds.txt"), "w") as handle:
        handle.write("1\n2\n")
    manifest = os.path.join(root, "manifest.csv")
    subprocess.run([sys.executable, converter, "--images", os.path.join(root, "list.txt"), "--truth",
                    os.path.join(root, "truth.txt"), "--folds", os.path.join(root, "folds.txt"), "--order", "bgr",
                    "--out", manifest], check=True)
    with open(manifest) as handle:
        lines = handle.read().splitlines()
    assert lines[0] == "image_id,image_path,mask_path,e_R,e_G,e_B,fold", lines[0]
    assert lines[1] == "img_a,img/a.ppm,,10.0,20.0,30.0,1", lines[1]

    result = subprocess.run([ccstat, "estimate", "--manifest", manifest, "--method", "gray_world"],
                            capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    rows = result.stdout.splitlines()
    assert rows[1].startswith("img_a,10,20,30,"), rows[1]
    assert rows[2].startswith("img_b,40,20,5,"), rows[2]
print("converter check passed")
