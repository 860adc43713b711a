#! /usr/bin/env python

import glob
import importlib
import importlib.util
import os
import shutil
import struct
import sys
import unittest

_glob_test_py = 'test_*.py'

# Campaign tests build reference measures and run replications; they are
# ordered after the fast unit tests.
_run_last = ('harness',)


def _print(text):
    print(text.replace('\n', os.linesep))


def _clean(dir):
    '''Remove the bytecode cache of a test directory.
    '''
    shutil.rmtree(os.path.join(dir or os.curdir, '__pycache__'), True)


def get_tests(dir='.', clean=False):
    '''Get a list of test module names in the given directory or file.

    Package subdirectories are searched recursively; names starting with
    ``.`` or ``_`` are skipped.
    '''
    res, prefix = [], ''
    if os.path.isdir(dir):
        if dir != '.':
            prefix = dir.rstrip(os.sep) + os.sep
        for sub in sorted(os.listdir(dir)):
            path = prefix + sub
            if sub[0] not in '._' and \
                    os.path.isfile(os.path.join(path, '__init__.py')):
                res.extend(get_tests(path, clean))
        pattern = prefix + _glob_test_py
        if clean:
            _clean(prefix)
    elif os.path.isfile(dir):
        pattern = dir
        head = os.path.split(dir)[0]
        if head:
            prefix = head + os.sep
    else:
        return res
    for path in sorted(glob.glob(pattern)):
        name = (prefix + os.path.basename(path))[:-3]
        res.append(name.replace(os.sep, '.').lstrip('.'))
    res.sort(key=lambda s: any(part in s.split('.') for part in _run_last))
    return res


def suite(dirs=['.'], clean=False, pre=True, verbose=2):
    '''Create a suite with all tests from the given directories.

    Returns the suite and whether every test module could be imported.
    '''
    complete = True
    res = unittest.TestSuite()
    loader = unittest.defaultTestLoader
    for dir in dirs:
        for name in get_tests(dir, clean):
            # module names are relative to the 'test' directory
            name = name[name.find('.')+1:]
            try:
                mod = importlib.import_module(name)
            except (SyntaxError, NameError, ImportError):
                if pre:
                    _print('Warning: ignoring %r due to an error while importing' % name)
                else:
                    _print('Error: %r missing or not found' % name)
                if verbose > 2:
                    raise  # show the error
                complete = False
                continue
            res.addTest(loader.loadTestsFromModule(mod))
    return res, complete


def _options(argv):
    '''Parse the leading options of `argv`; the rest are test locations.
    '''
    opts = {'clean': False, 'pre': True, 'verbose': 2}
    args = list(argv)
    while args:
        t, n = args[0], len(args[0])
        if '-clean'.startswith(t) and n > 1:
            opts['clean'] = True
        elif '-post-install'.startswith(t) and n > 4:
            opts['pre'] = False
        elif '-pre-install'.startswith(t) and n > 3:
            opts['pre'] = True
        elif '-slow'.startswith(t) and n > 2:
            os.environ['EOTSIEVE_SLOW_TESTS'] = '1'
        elif '-verbose'.startswith(t) and n > 1:
            opts['verbose'] = int(args.pop(1))
        else:
            break
        args.pop(0)
    return opts, args or ['.']


if __name__ == '__main__':

    opts, dirs = _options(sys.argv[1:])
    verbose = opts['verbose']

    # The package itself is importable from the parent directory for
    # pre-install testing only; test modules always come from ./test.
    root = os.path.split(sys.path[0])[0]
    if root and opts['pre']:
        sys.path.insert(1, root)
    test_dir = os.path.join(root, 'test')
    sys.path.append(test_dir)
    if not opts['pre']:
        # bind 'test' to this directory, not the standard library package
        spec = importlib.util.spec_from_file_location(
            'test', os.path.join(test_dir, '__init__.py'))
        sys.modules['test'] = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(sys.modules['test'])

    if verbose > 1:
        bits = '%d-bit [' % (struct.calcsize('P') << 3)
        _print('Python %s\n' % sys.version.replace('[', bits))
        if verbose > 4:
            _print('Sys.path: %s\n' % '\n          '.join(sys.path))
        if verbose > 3:
            _print('Test dirs: %r\n' % dirs)

    tst, complete = suite(dirs, clean=opts['clean'], pre=opts['pre'],
                          verbose=verbose)
    if opts['pre'] or complete:
        res = unittest.TextTestRunner(verbosity=verbose).run(tst)
        if res.wasSuccessful():
            sys.exit(0)
    sys.exit(1)
