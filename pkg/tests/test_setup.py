import codecs
import os
import re
import sys
import unittest

SETUP_PY = os.path.join(
    os.path.split(os.path.split(os.path.abspath(__file__))[0])[0],
    'setup.py'
)


class SetupTestCase(unittest.TestCase):

    def test_python_requires(self):
        with codecs.open(SETUP_PY, 'rb', 'utf-8') as f:
            m = re.search(r"python_requires='>=(\d+)\.(\d+)'", f.read())
        self.assertIsNotNone(m)
        minimum = (int(m.group(1)), int(m.group(2)))
        self.assertEqual((3, 8), minimum)
        self.assertGreaterEqual(sys.version_info[:2], minimum)


if __name__ == '__main__':
    unittest.main()
