'''
Module holding LogStore
'''

import logging
from logging import Logger

import logzero

#------------------------------------------------------------
class StoreFormater(logging.Formatter):
    '''
    Formatter coloring messages by level
    '''
    LOG_COLORS = {
        logging.DEBUG   : '\033[94m',     # Blue
        logging.INFO    : '\033[37m',     # White
        logging.WARNING : '\033[93m',     # Yellow
        logging.ERROR   : '\033[91m',     # Red
        logging.CRITICAL: '\033[1;91m'    # Bold Red
    }

    RESET_COLOR = '\033[0m'

    def format(self, record):
        log_color = self.LOG_COLORS.get(record.levelno, self.RESET_COLOR)
        message   = super().format(record)

        return f'{log_color}{message}{self.RESET_COLOR}'
#------------------------------------------------------------
class LogStore:
    '''
    Registry of the package loggers. Used to make loggers, set their levels
    (also before they exist) and configure them from the `logging` section of a YAML config
    '''
    #pylint: disable = invalid-name
    d_logger      : dict[str,Logger] = {}
    d_levels      : dict[str,   int] = {}
    log_level     = logging.INFO
    backend       = 'logging'

    d_level_name  = {
            'debug'   : logging.DEBUG,
            'info'    : logging.INFO,
            'warning' : logging.WARNING,
            'error'   : logging.ERROR,
            'critical': logging.CRITICAL}
    #--------------------------
    @staticmethod
    def add_logger(name : str, exists_ok : bool = False) -> Logger:
        '''
        Makes logger with the current backend and returns it

        name (str)      : Name of logger, e.g. pra:misclass:theory
        exists_ok (bool): If True and the logger was already made, return it, otherwise raise
        '''
        if name in LogStore.d_logger and not exists_ok:
            raise ValueError(f'Logger name {name} already found')

        if name in LogStore.d_logger:
            return LogStore.d_logger[name]

        level  = LogStore.d_levels.get(name, LogStore.log_level)

        if   LogStore.backend == 'logging':
            logger = LogStore._get_logging_logger(name, level)
        elif LogStore.backend == 'logzero':
            logger = LogStore._get_logzero_logger(name, level)
        else:
            raise ValueError(f'Invalid backend: {LogStore.backend}')

        LogStore.d_logger[name] = logger

        return logger
    #--------------------------
    @staticmethod
    def _get_logzero_logger(name : str, level : int) -> Logger:
        log = logzero.setup_logger(name=name)
        log.setLevel(level)

        return log
    #--------------------------
    @staticmethod
    def _get_logging_logger(name : str, level : int) -> Logger:
        logger = logging.getLogger(name=name)
        logger.setLevel(level)
        logger.propagate = False

        hnd= logging.StreamHandler()
        hnd.setLevel(level)

        fmt= StoreFormater('%(asctime)s - %(filename)s:%(lineno)d - %(message)s', datefmt='%H:%M:%S')
        hnd.setFormatter(fmt)

        if logger.hasHandlers():
            logger.handlers.clear()

        logger.addHandler(hnd)

        return logger
    #--------------------------
    @staticmethod
    def _to_level(value : int | str) -> int:
        if isinstance(value, int):
            return value

        if value.lower() not in LogStore.d_level_name:
            raise ValueError(f'Invalid log level: {value}')

        return LogStore.d_level_name[value.lower()]
    #--------------------------
    @staticmethod
    def set_level(name : str, value : int | str) -> None:
        '''
        Sets the level of a logger, if not present yet, the level is stored and applied when it is made

        name (str)        : Name of logger
        value (int or str): 10 debug, 20 info, 30 warning, or the level name
        '''
        level = LogStore._to_level(value)

        if name not in LogStore.d_logger:
            LogStore.d_levels[name] = level
            return

        lgr = LogStore.d_logger[name]
        lgr.setLevel(level)
        for hnd in lgr.handlers:
            hnd.setLevel(level)
    #--------------------------
    @staticmethod
    def configure(d_level : dict[str, int | str] | None) -> None:
        '''
        Takes the `logging` section of a config, mapping logger names to levels.
        The key `default` sets every other logger, existing or future
        '''
        if d_level is None:
            return

        if 'default' in d_level:
            LogStore.set_all_levels(d_level['default'])

        for name, value in d_level.items():
            if name != 'default':
                LogStore.set_level(name, value)
    #--------------------------
    @staticmethod
    def show_loggers() -> None:
        '''
        Prints loggers and log levels in two columns
        '''
        print(80 * '-')
        print(f'{"Name":<60}{"Level":<20}')
        print(80 * '-')
        for name, logger in LogStore.d_logger.items():
            print(f'{name:<60}{logger.level:<20}')
    #--------------------------
    @staticmethod
    def set_all_levels(level : int | str) -> None:
        '''
        Sets all loggers, existing and future ones, to this level
        '''
        level = LogStore._to_level(level)
        LogStore.log_level = level

        for name in LogStore.d_logger:
            LogStore.set_level(name, level)
#------------------------------------------------------------
