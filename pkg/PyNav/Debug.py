import logging, pathlib, sys

from PyNav.Config import Config


class Debug:
    FORMAT = '%(asctime)s:    %(message)s'
    DATEFMT = '%m/%d/%Y at %H:%M:%S'

    def __init__(self, filename):
        self._log = logging.getLogger('PyNav')
        self._log.setLevel(logging.INFO)
        self._log.propagate = False
        self._filename = filename
        self._file_handler = None

        if not self._log.handlers:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(logging.Formatter(Debug.FORMAT, Debug.DATEFMT))
            handler.setLevel(logging.WARNING)
            self._log.addHandler(handler)

        if Config.DEBUG:
            self.enable()

    # Starts appending everything (info and up) to the debug file.
    def enable(self, filename = None):
        if self._file_handler:
            return

        self._file_handler = logging.FileHandler(filename or self._filename, mode = 'a')
        self._file_handler.setFormatter(logging.Formatter(Debug.FORMAT, Debug.DATEFMT))
        self._log.addHandler(self._file_handler)
        self.write('\n---------------------------------\nPyNav started')

    def verbose(self):
        for handler in self._log.handlers:
            if handler is not self._file_handler:
                handler.setLevel(logging.INFO)

    def write(self, msg):
        self._log.info(msg)

    def warn(self, msg):
        self._log.warning(msg)


DEBUG = Debug(str(pathlib.Path.home()) + '/pynav.log')
